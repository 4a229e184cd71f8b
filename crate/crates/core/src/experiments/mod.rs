//! Solution-map experiments for the Euler flow: boundedness, Lipschitz
//! dependence in the lower norm, mollified-data (Bona–Smith) comparison and
//! the assembled continuity estimate. Each returns an [`ExperimentReport`].

pub mod cli;
pub mod config;
pub mod report;
pub mod suites;

use serde::{Deserialize, Serialize};

use crate::error::{arg, degenerate, Error, Result};
use crate::euler::{leray_project, solve, SolverConfig, Trajectory};
use crate::field::VectorField;
use crate::lp_bank::LPFilterBank;
use crate::norms::{norm_vector, NormSpec};
use report::{ExperimentReport, Table};

/// Existence time in the well-posedness theory depends on the data only
/// implicitly; runs pick `T` from the CFL guard and calibration instead.
pub const TIME_NOTE: &str = "T is not given by a formula; it is chosen within the CFL guard and the calibrated regime";

/// Parameters shared by the dependence experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependenceConfig {
    pub norm_spec: NormSpec,
    /// Mollification levels `N` for `P_{≤N}`, increasing.
    #[serde(rename = "N_list")]
    pub n_list: Vec<usize>,
    /// Perturbation amplitudes, decreasing.
    pub eps_list: Vec<f64>,
    pub solver: SolverConfig,
    pub seed: u64,
}

impl DependenceConfig {
    pub fn new(norm_spec: NormSpec, solver: SolverConfig) -> Self {
        Self {
            norm_spec,
            n_list: vec![3, 4, 5],
            eps_list: vec![1e-1, 1e-2, 1e-3, 1e-4],
            solver,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.norm_spec.validate()?;
        self.solver.validate()?;
        if self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return arg("N_list must be strictly increasing");
        }
        if self.eps_list.windows(2).any(|w| !(w[0] > w[1])) || self.eps_list.iter().any(|&e| !(e > 0.0)) {
            return arg("eps_list must be positive and strictly decreasing");
        }
        Ok(())
    }

    fn report(&self, id: &str, u0: &VectorField) -> ExperimentReport {
        let g = u0.grid();
        let s = &self.norm_spec;
        let mut r = ExperimentReport::new(id, s.s, s.p.value(), s.q.value(), g.dim(), g.n());
        r.meta("T", self.solver.t_final);
        r.meta("dt", self.solver.dt);
        r.note(TIME_NOTE);
        r
    }
}

fn spec_norm(bank: &LPFilterBank, u: &VectorField, spec: &NormSpec) -> Result<f64> {
    norm_vector(bank, u, spec)
}

/// `sup` over the recorded times of `‖a(t) − b(t)‖` in `spec`.
pub fn sup_difference(bank: &LPFilterBank, a: &Trajectory, b: &Trajectory, spec: &NormSpec) -> Result<f64> {
    if a.times.len() != b.times.len() || a.times.iter().zip(&b.times).any(|(x, y)| (x - y).abs() > 1e-12) {
        return arg("trajectories are recorded at different times");
    }
    let mut worst: f64 = 0.0;
    for (x, y) in a.states.iter().zip(&b.states) {
        worst = worst.max(spec_norm(bank, &x.sub(y), spec)?);
    }
    Ok(worst)
}

/// `sup_t ‖u(t)‖` in `spec`.
pub fn sup_norm(bank: &LPFilterBank, a: &Trajectory, spec: &NormSpec) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for x in &a.states {
        worst = worst.max(spec_norm(bank, x, spec)?);
    }
    Ok(worst)
}

/// `P_{≤N}` applied componentwise, followed by the (identity on
/// divergence-free data) Leray projection.
pub fn mollify(bank: &LPFilterBank, u: &VectorField, level: usize) -> Result<VectorField> {
    let comps = u.components().iter().map(|c| bank.p_le(c, level)).collect::<Result<Vec<_>>>()?;
    Ok(leray_project(&VectorField::new(comps)?).to_physical())
}

/// Euler scaling `u₀ ↦ λu₀`, `T ↦ T/λ`, `dt ↦ dt/λ`.
pub fn rescale(u0: &VectorField, solver: &SolverConfig, lambda: f64) -> (VectorField, SolverConfig) {
    (u0.scale(lambda), SolverConfig { dt: solver.dt / lambda, t_final: solver.t_final / lambda, ..*solver })
}

/// `‖f‖_{F^s} / (‖f‖^{1/2}_{F^{s−1}} ‖f‖^{1/2}_{F^{s+1}})`.
pub fn interpolation_ratio(bank: &LPFilterBank, u: &VectorField, spec: &NormSpec) -> Result<f64> {
    let mid = spec_norm(bank, u, spec)?;
    let lo = spec_norm(bank, u, &spec.with_s(spec.s - 1.0))?;
    let hi = spec_norm(bank, u, &spec.with_s(spec.s + 1.0))?;
    if lo == 0.0 || hi == 0.0 {
        return degenerate("zero field in interpolation check");
    }
    Ok(mid / (lo * hi).sqrt())
}

/// `‖u_dt(T) − u_{dt/2}(T)‖` in `spec`: the size of the time-stepping error.
pub fn discretization_floor(bank: &LPFilterBank, u0: &VectorField, solver: &SolverConfig, spec: &NormSpec) -> Result<f64> {
    let coarse = solve(u0, solver, None, &[])?;
    let fine_cfg = SolverConfig { dt: solver.dt / 2.0, record_every: solver.record_every * 2, ..*solver };
    let fine = solve(u0, &fine_cfg, None, &[])?;
    spec_norm(bank, &coarse.final_state().sub(fine.final_state()), spec)
}

/// `sup_t ‖u(t)‖_{F^s} / ‖u₀‖_{F^s}`.
pub fn boundedness_experiment(bank: &LPFilterBank, u0: &VectorField, cfg: &DependenceConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let spec = cfg.norm_spec;
    let n0 = spec_norm(bank, u0, &spec)?;
    if n0 == 0.0 {
        return degenerate("zero initial data");
    }
    let traj = solve(u0, &cfg.solver, Some(bank), &[spec])?;
    let mut report = cfg.report("boundedness", u0);
    let mut table = Table::new(&["t", "norm", "ratio"]);
    for d in &traj.diagnostics {
        table.push(vec![d.time, d.norms[0], d.norms[0] / n0]);
    }
    report.record(cfg.seed, traj.sup_norm(0) / n0);
    report.table = table;
    report.meta("initial_norm", n0);
    Ok(report)
}

/// For each `ε`: `L(ε) = sup_t ‖S(u₀) − S(u₀ + εw)‖_{F^{s−1}} / ‖εw‖_{F^{s−1}}`
/// with `w` the direction `v₀ − u₀` normalized to unit `F^{s−1}` norm.
pub fn lipschitz_lowernorm_experiment(
    bank: &LPFilterBank,
    u0: &VectorField,
    v0: &VectorField,
    cfg: &DependenceConfig,
) -> Result<ExperimentReport> {
    cfg.validate()?;
    let low = cfg.norm_spec.with_s(cfg.norm_spec.s - 1.0);
    let dir = v0.sub(u0);
    let dn = spec_norm(bank, &dir, &low)?;
    if dn == 0.0 {
        return degenerate("identical data: zero perturbation");
    }
    let w = dir.scale(1.0 / dn);
    let base = solve(u0, &cfg.solver, None, &[])?;
    let mut report = cfg.report("lipschitz-lower-norm", u0);
    report.s = low.s;
    let mut table = Table::new(&["eps", "L"]);
    for (i, &eps) in cfg.eps_list.iter().enumerate() {
        let pert = solve(&u0.axpy(eps, &w), &cfg.solver, None, &[])?;
        let l = sup_difference(bank, &base, &pert, &low)? / eps;
        report.record(cfg.seed + i as u64, l);
        table.push(vec![eps, l]);
    }
    report.table = table;
    report.meta("variation", report.max / report.min());
    report.note("seeds hold base_seed + index into eps_list");
    Ok(report)
}

/// For each `N`: `ρ(N) = sup_t ‖u − u^N‖_{F^s} / ‖u₀ − P_{≤N}u₀‖_{F^s}` and
/// `σ(N) = sup_t ‖u^N‖_{F^{s+1}} / (2^N ‖u₀‖_{F^s})`, where `u^N` starts
/// from `P_{≤N}u₀`. Ratios hold `ρ`; `σ` is in the table and metadata.
pub fn bona_smith_experiment(bank: &LPFilterBank, u0: &VectorField, cfg: &DependenceConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let spec = cfg.norm_spec;
    let hi = spec.with_s(spec.s + 1.0);
    let n0 = spec_norm(bank, u0, &spec)?;
    let base = solve(u0, &cfg.solver, None, &[])?;
    let mut report = cfg.report("bona-smith", u0);
    let mut table = Table::new(&["N", "rho", "sigma", "tail"]);
    let mut sigmas = Vec::new();
    for &level in &cfg.n_list {
        let data = mollify(bank, u0, level)?;
        let tail = spec_norm(bank, &u0.sub(&data), &spec)?;
        if tail <= 1e-13 * n0 {
            return degenerate(format!("P_{{≤{level}}}u₀ = u₀: no tail at level {level}"));
        }
        let traj = solve(&data, &cfg.solver, None, &[])?;
        let rho = sup_difference(bank, &base, &traj, &spec)? / tail;
        let sigma = sup_norm(bank, &traj, &hi)? / (2f64.powi(level as i32) * n0);
        report.record(level as u64, rho);
        sigmas.push(sigma);
        table.push(vec![level as f64, rho, sigma, tail]);
    }
    report.table = table;
    report.meta("N_list", &cfg.n_list);
    report.meta("sigma", &sigmas);
    report.meta("rho_spread", report.max / report.min());
    report.note("seeds hold the mollification level N of each ratio");
    Ok(report)
}

/// The pieces of the assembled continuity estimate at level `N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuityPieces {
    /// `sup_t ‖S(u₀) − S(P_{≤N}u₀)‖_{F^s}`.
    pub tail_u: f64,
    /// `sup_t ‖S(ψ) − S(P_{≤N}ψ)‖_{F^s}`.
    pub tail_psi: f64,
    /// `sup_t ‖δ‖^{1/2}_{F^{s−1}} · sup_t ‖δ‖^{1/2}_{F^{s+1}}` for
    /// `δ = S(P_{≤N}u₀) − S(P_{≤N}ψ)`.
    pub interpolated: f64,
    /// `sup_t ‖S(u₀) − S(ψ)‖_{F^s}`.
    pub direct: f64,
}

impl ContinuityPieces {
    pub fn chain(&self) -> f64 {
        self.tail_u + self.tail_psi + self.interpolated
    }
}

/// Slack allowed between the direct difference and the chain bound.
pub const CHAIN_SLACK: f64 = 1.05;

/// Direct difference versus the three-piece chain at level `level`.
/// Fails with an assertion error when `direct > CHAIN_SLACK · chain`.
pub fn continuity_assembly(
    bank: &LPFilterBank,
    u0: &VectorField,
    psi: &VectorField,
    level: usize,
    cfg: &DependenceConfig,
) -> Result<(ContinuityPieces, ExperimentReport)> {
    cfg.validate()?;
    let spec = cfg.norm_spec;
    let su = solve(u0, &cfg.solver, None, &[])?;
    let sp = solve(psi, &cfg.solver, None, &[])?;
    let su_n = solve(&mollify(bank, u0, level)?, &cfg.solver, None, &[])?;
    let sp_n = solve(&mollify(bank, psi, level)?, &cfg.solver, None, &[])?;
    let lo = sup_difference(bank, &su_n, &sp_n, &spec.with_s(spec.s - 1.0))?;
    let hi = sup_difference(bank, &su_n, &sp_n, &spec.with_s(spec.s + 1.0))?;
    let pieces = ContinuityPieces {
        tail_u: sup_difference(bank, &su, &su_n, &spec)?,
        tail_psi: sup_difference(bank, &sp, &sp_n, &spec)?,
        interpolated: (lo * hi).sqrt(),
        direct: sup_difference(bank, &su, &sp, &spec)?,
    };
    let mut report = cfg.report("continuity-assembly", u0);
    let chain = pieces.chain();
    let r = if pieces.direct == 0.0 { 0.0 } else { pieces.direct / chain };
    report.record(level as u64, r);
    let mut table = Table::new(&["N", "tail_u", "tail_psi", "interpolated", "chain", "direct"]);
    table.push(vec![level as f64, pieces.tail_u, pieces.tail_psi, pieces.interpolated, chain, pieces.direct]);
    report.table = table;
    report.meta("pieces", pieces);
    report.meta("slack", CHAIN_SLACK);
    if pieces.direct > CHAIN_SLACK * chain {
        return Err(Error::Assertion(format!(
            "direct difference {:.6e} exceeds the chain bound {chain:.6e} by more than the allowed slack",
            pieces.direct
        )));
    }
    Ok((pieces, report))
}

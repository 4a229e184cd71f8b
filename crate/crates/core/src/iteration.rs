//! Successive approximations `u^{(m)}` for the Euler system.
//!
//! `u^{(0)} = 0` and member `m ≥ 1` solves the linear transport problem
//! `∂_t u^{(m)} + ℙ(u^{(m−1)}·∇u^{(m)}) = 0` with data `P_{≤m}u₀`. The
//! projection is applied at every right-hand-side evaluation, which keeps
//! each member divergence-free. All members are advanced together as one
//! coupled RK4 system so that member `m` sees `u^{(m−1)}` at the same stage
//! times.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{arg, degenerate, Error, Result};
use crate::euler::{advection, courant, diagnostics, leray_project, SolverConfig, Trajectory};
use crate::experiments::report::{ExperimentReport, Table};
use crate::field::io::{write_field, FieldData};
use crate::field::{Repr, VectorField};
use crate::lp_bank::LPFilterBank;
use crate::norms::{BlockMagnitudes, NormSpec};

pub const DEFAULT_MEMBERS: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct IterationLadder {
    /// `members[m]` is `u^{(m)}`, `0 ≤ m ≤ M`.
    pub members: Vec<Trajectory>,
    pub norm_spec: NormSpec,
    /// `decay_table[m − 1] = δ_m = sup_t ‖u^{(m)} − u^{(m−1)}‖_{F^{s−1}}`.
    pub decay_table: Vec<f64>,
}

impl IterationLadder {
    pub fn m(&self) -> usize {
        self.members.len() - 1
    }

    pub fn delta(&self, m: usize) -> f64 {
        self.decay_table[m - 1]
    }

    /// `δ_{m+1}/δ_m` for `m = 1 … M−1` (zero when both vanish).
    pub fn ratios(&self) -> Vec<f64> {
        self.decay_table
            .windows(2)
            .map(|w| if w[1] == 0.0 { 0.0 } else { w[1] / w[0] })
            .collect()
    }

    /// `sup_t ‖u^{(m)}(t)‖` in the ladder's norm.
    pub fn sup_norm(&self, m: usize) -> f64 {
        self.members[m].sup_norm(0)
    }

    pub fn top(&self) -> &Trajectory {
        self.members.last().expect("M ≥ 1")
    }

    /// Final state of every member under `fields/` and `ladder.json`
    /// `{M, norm_spec, delta[], ratios[], member_files[]}` under `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir.join("fields"))?;
        let mut member_files = Vec::new();
        for (m, traj) in self.members.iter().enumerate() {
            let name = format!("fields/member_{m:02}.lpf");
            write_field(dir.join(&name), &FieldData::Vector(traj.final_state().to_physical()))?;
            member_files.push(name);
        }
        let manifest = LadderManifest {
            m: self.m(),
            norm_spec: self.norm_spec,
            delta: self.decay_table.clone(),
            ratios: self.ratios(),
            member_files,
            times: self.members[0].times.clone(),
        };
        fs::write(dir.join("ladder.json"), serde_json::to_string_pretty(&manifest)?)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderManifest {
    #[serde(rename = "M")]
    pub m: usize,
    pub norm_spec: NormSpec,
    pub delta: Vec<f64>,
    pub ratios: Vec<f64>,
    pub member_files: Vec<String>,
    pub times: Vec<f64>,
}

fn member_rhs(members: &[VectorField], dealias: bool) -> Vec<VectorField> {
    let g = members[0].grid();
    let mut out = Vec::with_capacity(members.len());
    out.push(VectorField::zeros(g, Repr::Spectral));
    for w in members.windows(2) {
        out.push(leray_project(&advection(&w[0], &w[1], dealias)).scale(-1.0));
    }
    out
}

fn combine(base: &[VectorField], h: f64, k: &[VectorField]) -> Vec<VectorField> {
    base.iter().zip(k).map(|(u, v)| u.axpy(h, v)).collect()
}

/// Build the ladder `u^{(0)}, …, u^{(M)}` on `[0, T]`, recording
/// `‖u^{(m)}(t)‖` in `norm_spec` and `δ_m` in the same norm with `s − 1`.
pub fn iterate(
    bank: &LPFilterBank,
    u0: &VectorField,
    m_top: usize,
    cfg: &SolverConfig,
    norm_spec: &NormSpec,
) -> Result<IterationLadder> {
    cfg.validate()?;
    norm_spec.validate()?;
    if m_top < 1 {
        return arg("the ladder needs M ≥ 1");
    }
    if bank.grid() != u0.grid() {
        return arg("filter bank and data live on different grids");
    }
    u0.require_div_free("initial velocity")?;
    let low_spec = norm_spec.with_s(norm_spec.s - 1.0);
    let grid = u0.grid();
    let steps = cfg.steps()?;

    // members[i] holds u^{(i+1)}
    let mut state: Vec<VectorField> = (1..=m_top)
        .map(|m| {
            let comps = u0
                .components()
                .iter()
                .map(|c| bank.p_le(&c.to_spectral(), m))
                .collect::<Result<Vec<_>>>()?;
            Ok(leray_project(&VectorField::new(comps)?))
        })
        .collect::<Result<Vec<_>>>()?;

    let zero = VectorField::zeros(grid, Repr::Physical);
    let mut members: Vec<Trajectory> = (0..=m_top)
        .map(|_| Trajectory { times: Vec::new(), states: Vec::new(), diagnostics: Vec::new(), norm_specs: vec![*norm_spec] })
        .collect();
    let mut decay = vec![0.0f64; m_top];

    let mut record = |t: f64, state: &[VectorField], members: &mut [Trajectory]| -> Result<()> {
        let phys: Vec<VectorField> = std::iter::once(zero.clone())
            .chain(state.iter().map(|u| u.to_physical()))
            .collect();
        for (m, u) in phys.iter().enumerate() {
            members[m].times.push(t);
            members[m].diagnostics.push(diagnostics(Some(bank), u, t, std::slice::from_ref(norm_spec))?);
            members[m].states.push(u.clone());
        }
        for m in 1..=m_top {
            let diff = phys[m].sub(&phys[m - 1]);
            let v = BlockMagnitudes::new(bank, diff.components())?.norm(&low_spec)?;
            decay[m - 1] = decay[m - 1].max(v);
        }
        Ok(())
    };

    record(0.0, &state, &mut members)?;
    for step in 0..steps {
        let t = step as f64 * cfg.dt;
        for (i, u) in state.iter().enumerate() {
            let c = courant(u, cfg.dt);
            if c > cfg.cfl_guard {
                return Err(Error::Stability { time: t, courant: c, member: Some(i + 1) });
            }
        }
        let k1 = member_rhs(&state, cfg.dealias);
        let k2 = member_rhs(&combine(&state, 0.5 * cfg.dt, &k1), cfg.dealias);
        let k3 = member_rhs(&combine(&state, 0.5 * cfg.dt, &k2), cfg.dealias);
        let k4 = member_rhs(&combine(&state, cfg.dt, &k3), cfg.dealias);
        state = state
            .iter()
            .enumerate()
            .map(|(i, u)| {
                let incr = k1[i].add(&k2[i].scale(2.0)).add(&k3[i].scale(2.0)).add(&k4[i]);
                leray_project(&u.axpy(cfg.dt / 6.0, &incr))
            })
            .collect();
        let done = step + 1;
        if done % cfg.record_every == 0 || done == steps {
            record(done as f64 * cfg.dt, &state, &mut members)?;
        }
    }
    Ok(IterationLadder { members, norm_spec: *norm_spec, decay_table: decay })
}

/// `δ_m` and the consecutive ratios `δ_{m+1}/δ_m`.
pub fn cauchy_report(ladder: &IterationLadder) -> Result<ExperimentReport> {
    if ladder.m() < 4 {
        return arg("the Cauchy report needs M ≥ 4");
    }
    if ladder.decay_table.iter().all(|&d| d == 0.0) {
        return degenerate("every ladder increment vanishes");
    }
    let spec = ladder.norm_spec;
    let g = ladder.members[0].states[0].grid();
    let mut report = ExperimentReport::new("iteration-cauchy", spec.s - 1.0, spec.p.value(), spec.q.value(), g.dim(), g.n());
    let mut table = Table::new(&["m", "delta", "ratio", "sup_norm"]);
    let ratios = ladder.ratios();
    for m in 1..=ladder.m() {
        let r = if m >= 2 { ratios[m - 2] } else { f64::NAN };
        table.push(vec![m as f64, ladder.delta(m), r, ladder.sup_norm(m)]);
        if m >= 2 {
            report.record(m as u64, r);
        }
    }
    report.table = table;
    report.meta("M", ladder.m());
    report.meta("delta", &ladder.decay_table);
    report.meta("T", ladder.members[0].times.last().copied().unwrap_or(0.0));
    report.note("seeds hold the member index m + 1 of each ratio δ_{m+1}/δ_m");
    Ok(report)
}

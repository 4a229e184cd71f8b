//! Bony decomposition, the commutator `[f,Δ_j]·∇g`, and ratio harnesses for
//! the product and commutator estimates.
//!
//! Blocks are indexed `−1, 0, …, j_max` with block `−1` the low part
//! `P_{≤0}`. A pair `(l, j)` of blocks of `(f, g)` contributes to `T_f g` when
//! `l ≤ j − 4`, to `T_g f` when `j ≤ l − 4`, and to `R(f,g)` otherwise, so the
//! three pieces partition the product exactly. Every product is 2/3-rule
//! dealiased: factors are truncated first and the sum is truncated last.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{arg, degenerate, Result};
use crate::experiments::report::{ExperimentReport, Table};
use crate::field::calculus::{dealias, dealiased_product, derivative_unchecked, gradient, product_of_truncated, remove_mean};
use crate::field::random::{random_vector, SpectrumSpec};
use crate::field::{Grid, GridField, Repr, VectorField};
use crate::lp_bank::LPFilterBank;
use crate::norms::{lp_norm_components, lp_of, lq_of, norm_components, BlockMagnitudes, Flavor, NormSpec};

/// Paraproduct offset: `S_{j−3}` pairs with `Δ_j`.
pub const OFFSET: i64 = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct BonyPieces {
    pub t_fg: GridField,
    pub t_gf: GridField,
    pub r_fg: GridField,
}

impl BonyPieces {
    pub fn sum(&self) -> GridField {
        self.t_fg.add(&self.t_gf).add(&self.r_fg)
    }
}

/// Physical samples of the low part followed by every block.
fn physical_blocks(bank: &LPFilterBank, f: &GridField) -> Vec<Vec<Complex64>> {
    let (low, blocks) = bank.spectral_blocks(f);
    std::iter::once(low)
        .chain(blocks)
        .map(|b| b.into_physical().into_values())
        .collect()
}

fn from_physical(grid: Grid, values: Vec<Complex64>, is_real: bool) -> GridField {
    GridField::from_values(grid, values, Repr::Physical, is_real).expect("grid length")
}

fn truncate_physical(grid: Grid, values: Vec<Complex64>, is_real: bool) -> GridField {
    dealias(&from_physical(grid, values, is_real)).into_physical()
}

/// `T_f g`, `T_g f` and `R(f,g)` (physical representation).
pub fn bony(bank: &LPFilterBank, f: &GridField, g: &GridField) -> Result<BonyPieces> {
    let grid = bank.grid();
    if f.grid() != grid || g.grid() != grid {
        return arg("bony: fields and filter bank must share one grid");
    }
    let is_real = f.is_real() && g.is_real();
    let bf = physical_blocks(bank, &dealias(f));
    let bg = physical_blocks(bank, &dealias(g));
    let nb = bf.len() as i64;
    let zero = Complex64::new(0.0, 0.0);
    let mut t_fg = vec![zero; grid.len()];
    let mut t_gf = vec![zero; grid.len()];
    let mut r = vec![zero; grid.len()];
    // position i in the vectors corresponds to block index i − 1
    for a in 0..nb {
        for b in 0..nb {
            let target = if a <= b - OFFSET {
                &mut t_fg
            } else if b <= a - OFFSET {
                &mut t_gf
            } else {
                &mut r
            };
            let (x, y) = (&bf[a as usize], &bg[b as usize]);
            for ((t, u), v) in target.iter_mut().zip(x).zip(y) {
                *t += u * v;
            }
        }
    }
    Ok(BonyPieces {
        t_fg: truncate_physical(grid, t_fg, is_real),
        t_gf: truncate_physical(grid, t_gf, is_real),
        r_fg: truncate_physical(grid, r, is_real),
    })
}

/// `c_j = Σ_l f^l Δ_j h^l − Δ_j(f^l h^l)` for every `0 ≤ j ≤ j_max`.
///
/// The mean of each `f^l` commutes with `Δ_j` and is dropped before
/// multiplying, so spatially constant `f` gives identically zero output.
pub fn commutator_dot(bank: &LPFilterBank, f: &VectorField, h: &[GridField]) -> Result<Vec<GridField>> {
    let grid = bank.grid();
    if f.grid() != grid || h.iter().any(|c| c.grid() != grid) || h.len() != f.dim() {
        return arg("commutator: operands must be d-component fields on the filter bank grid");
    }
    let is_real = f.components().iter().chain(h).all(|c| c.is_real());
    let ft: Vec<GridField> = f.components().iter().map(|c| dealias(&remove_mean(c)).into_physical()).collect();
    let ht: Vec<GridField> = h.iter().map(dealias).collect();
    let products: Vec<GridField> = ft
        .iter()
        .zip(&ht)
        .map(|(a, b)| product_of_truncated(a, &b.to_physical()))
        .collect();
    let mut out = Vec::with_capacity(bank.j_max() + 1);
    for j in 0..=bank.j_max() {
        let psi = bank.psi(j);
        let mut acc = GridField::zeros(grid, Repr::Spectral);
        for (fl, (hl, pl)) in ft.iter().zip(ht.iter().zip(&products)) {
            let dh = hl.apply_table(psi).into_physical();
            acc = acc.add(&product_of_truncated(fl, &dh)).sub(&pl.apply_table(psi));
        }
        out.push(acc.set_real(is_real).into_physical());
    }
    Ok(out)
}

/// `[f, Δ_j]·∇g = f·∇(Δ_j g) − Δ_j(f·∇g)` for every `j`.
pub fn commutator_sequence(bank: &LPFilterBank, f: &VectorField, g: &GridField) -> Result<Vec<GridField>> {
    f.require_div_free("commutator vector field")?;
    let grad = gradient(g).into_components();
    commutator_dot(bank, f, &grad)
}

/// `[f, Δ_j]·∇g` for one `j`.
pub fn commutator(bank: &LPFilterBank, f: &VectorField, g: &GridField, j: usize) -> Result<GridField> {
    if j > bank.j_max() {
        return arg(format!("block index {j} exceeds j_max = {}", bank.j_max()));
    }
    Ok(commutator_sequence(bank, f, g)?.swap_remove(j))
}

/// `‖(Σ_j |2^{js} c_j|^q)^{1/q}‖_{L^p}`.
pub fn sequence_norm(seq: &[GridField], s: f64, p: f64, q: f64) -> f64 {
    let grid = seq[0].grid();
    let mags: Vec<Vec<f64>> = seq.iter().map(|c| c.abs_values()).collect();
    let agg: Vec<f64> = (0..grid.len())
        .map(|x| lq_of(mags.iter().enumerate().map(|(j, m)| 2f64.powf(j as f64 * s) * m[x]), q))
        .collect();
    lp_of(&agg, p, grid.cell_volume())
}

fn ratio(lhs: f64, rhs: f64, what: &str) -> Result<f64> {
    if lhs == 0.0 {
        return Ok(0.0);
    }
    if rhs == 0.0 {
        return degenerate(format!("{what}: right-hand side vanishes"));
    }
    Ok(lhs / rhs)
}

fn require_tl(spec: &NormSpec) -> Result<()> {
    spec.validate()?;
    if spec.flavor != Flavor::TriebelLizorkin {
        return arg("product and commutator estimates are stated in Triebel-Lizorkin norms");
    }
    Ok(())
}

/// `‖fg‖ / (‖f‖_∞‖g‖ + ‖g‖_∞‖f‖)` in the norm of `spec`.
pub fn verify_moser(bank: &LPFilterBank, f: &GridField, g: &GridField, spec: &NormSpec) -> Result<f64> {
    require_tl(spec)?;
    if !(spec.s > 0.0) {
        return arg("product estimate requires s > 0");
    }
    if f.spectral_max() == 0.0 || g.spectral_max() == 0.0 {
        return degenerate("product estimate: a factor vanishes identically");
    }
    let fg = dealiased_product(f, g);
    let lhs = norm_components(bank, std::slice::from_ref(&fg), spec)?;
    let nf = norm_components(bank, std::slice::from_ref(f), spec)?;
    let ng = norm_components(bank, std::slice::from_ref(g), spec)?;
    let rhs = lp_norm_components(std::slice::from_ref(f), f64::INFINITY)? * ng
        + lp_norm_components(std::slice::from_ref(g), f64::INFINITY)? * nf;
    ratio(lhs, rhs, "product estimate")
}

/// Which right-hand side of the transport product estimate to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransportForm {
    /// `‖u‖_∞‖∇v‖ + ‖∇v‖_∞‖u‖`
    GradientSup,
    /// `‖u‖_∞‖∇v‖ + ‖v‖_∞‖∇u‖`
    ValueSup,
}

fn jacobian(u: &VectorField) -> Vec<GridField> {
    u.components().iter().flat_map(|c| gradient(c).into_components()).collect()
}

/// `‖u·∇v‖ / RHS` for divergence-free `u` and scalar `v`.
pub fn verify_moser_transport(
    bank: &LPFilterBank,
    u: &VectorField,
    v: &GridField,
    spec: &NormSpec,
    form: TransportForm,
) -> Result<f64> {
    require_tl(spec)?;
    u.require_div_free("transported velocity")?;
    if !(spec.s > -1.0) {
        return arg("transport estimate requires s > −1");
    }
    let grad_v = gradient(v).into_components();
    let mut adv = GridField::zeros(bank.grid(), Repr::Spectral);
    for (ul, dv) in u.components().iter().zip(&grad_v) {
        adv = adv.add(&dealiased_product(ul, dv));
    }
    let lhs = norm_components(bank, std::slice::from_ref(&adv), spec)?;
    let sup_u = lp_norm_components(u.components(), f64::INFINITY)?;
    let rhs = match form {
        TransportForm::GradientSup => {
            sup_u * norm_components(bank, &grad_v, spec)?
                + lp_norm_components(&grad_v, f64::INFINITY)? * norm_components(bank, u.components(), spec)?
        }
        TransportForm::ValueSup => {
            sup_u * norm_components(bank, &grad_v, spec)?
                + lp_norm_components(std::slice::from_ref(v), f64::INFINITY)? * norm_components(bank, &jacobian(u), spec)?
        }
    };
    ratio(lhs, rhs, "transport estimate")
}

/// Which right-hand side of the commutator estimate to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CommutatorForm {
    /// `‖∇f‖_∞‖g‖ + ‖∇g‖_∞‖f‖`, valid for `s > 0`.
    GradientSup,
    /// `‖∇f‖_∞‖g‖ + ‖g‖_∞‖∇f‖`, valid for `s > −1`.
    ValueSup,
}

/// `‖2^{js}[f,Δ_j]·∇g‖_{L^p ℓ^q} / RHS` with the norms of `spec`.
pub fn verify_commutator_estimate(
    bank: &LPFilterBank,
    f: &VectorField,
    g: &GridField,
    spec: &NormSpec,
    form: CommutatorForm,
) -> Result<f64> {
    require_tl(spec)?;
    match form {
        CommutatorForm::GradientSup if !(spec.s > 0.0) => return arg("this commutator form requires s > 0"),
        CommutatorForm::ValueSup if !(spec.s > -1.0) => return arg("this commutator form requires s > −1"),
        _ => {}
    }
    let seq = commutator_sequence(bank, f, g)?;
    let lhs = sequence_norm(&seq, spec.s, spec.p.value(), spec.q.value());
    let jac = jacobian(f);
    let grad_f_sup = lp_norm_components(&jac, f64::INFINITY)?;
    let g_norm = norm_components(bank, std::slice::from_ref(g), spec)?;
    let rhs = match form {
        CommutatorForm::GradientSup => {
            let grad_g = gradient(g).into_components();
            grad_f_sup * g_norm
                + lp_norm_components(&grad_g, f64::INFINITY)? * norm_components(bank, f.components(), spec)?
        }
        CommutatorForm::ValueSup => {
            grad_f_sup * g_norm
                + lp_norm_components(std::slice::from_ref(g), f64::INFINITY)? * norm_components(bank, &jac, spec)?
        }
    };
    ratio(lhs, rhs, "commutator estimate")
}

/// Test-pair families for the commutator scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScanFamily {
    /// `u = v = (0, Σ_{m≤N} 2^{−ms} cos(2^m x₁), 0…)`.
    Lacunary,
    /// `u = ∇^⊥(b·cos(2^N x₁))` against the low-frequency `v = ∇^⊥ b`,
    /// `b` a Gaussian bump.
    ModulatedBump,
    /// Independent random divergence-free fields on the shell `[2^{N−1}, 2^N]`.
    Random,
}

impl std::str::FromStr for ScanFamily {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "lacunary" => Ok(Self::Lacunary),
            "modulated-bump" => Ok(Self::ModulatedBump),
            "random" => Ok(Self::Random),
            other => Err(format!("unknown family '{other}' (lacunary | modulated-bump | random)")),
        }
    }
}

/// Periodic Gaussian bump centred in the box.
fn bump(grid: Grid, width: f64) -> GridField {
    let c = std::f64::consts::PI;
    GridField::from_fn(grid, |x| (-x.iter().map(|v| (v - c) * (v - c)).sum::<f64>() / (2.0 * width * width)).exp())
}

/// `(−∂₂ψ, ∂₁ψ, 0…)`: divergence free in any dimension.
fn perp_gradient(psi: &GridField) -> VectorField {
    let grid = psi.grid();
    let mut comps = vec![derivative_unchecked(psi, 1).scale(-1.0), derivative_unchecked(psi, 0)];
    while comps.len() < grid.dim() {
        comps.push(GridField::zeros(grid, Repr::Physical));
    }
    VectorField::new(comps.into_iter().map(|c| c.into_physical()).collect())
        .expect("d components")
        .with_div_free(true)
}

fn scan_pair(grid: Grid, family: ScanFamily, s: f64, big_n: u32, seed: u64) -> Result<(VectorField, VectorField)> {
    let d = grid.dim();
    match family {
        ScanFamily::Lacunary => {
            let profile = GridField::from_fn(grid, |x| {
                (1..=big_n).map(|m| 2f64.powf(-(m as f64) * s) * ((1u64 << m) as f64 * x[0]).cos()).sum()
            });
            let mut comps = vec![GridField::zeros(grid, Repr::Physical), profile];
            while comps.len() < d {
                comps.push(GridField::zeros(grid, Repr::Physical));
            }
            let u = VectorField::new_div_free(comps)?;
            Ok((u.clone(), u))
        }
        ScanFamily::ModulatedBump => {
            let b = bump(grid, 0.6);
            let carrier = GridField::from_fn(grid, |x| ((1u64 << big_n) as f64 * x[0]).cos());
            let psi = dealias(&from_physical(
                grid,
                b.values().iter().zip(carrier.values()).map(|(a, c)| a * c).collect(),
                true,
            ));
            Ok((perp_gradient(&psi), perp_gradient(&dealias(&b))))
        }
        ScanFamily::Random => {
            let hi = (1u64 << big_n) as f64;
            let spec = SpectrumSpec::new(0.0, (hi / 2.0).max(1.0), hi, seed);
            let u = random_vector(grid, &spec)?;
            let v = random_vector(grid, &spec.with_seed(seed.wrapping_add(1)))?;
            Ok((u, v))
        }
    }
}

/// Ratio profile `‖2^{js}[u,Δ_j]·v‖_{L^p ℓ^q} / (‖u‖_{F^s}‖v‖_{F^s})` over the
/// scale list. Growth is reported, never asserted.
pub fn counterexample_scan(
    bank: &LPFilterBank,
    family: ScanFamily,
    s: f64,
    p: f64,
    q: f64,
    scale_list: &[u32],
    seed: u64,
) -> Result<ExperimentReport> {
    let grid = bank.grid();
    let spec = NormSpec::tl(s, p, q)?;
    if scale_list.windows(2).any(|w| w[0] >= w[1]) {
        return arg("scale list must be increasing");
    }
    let cut = grid.dealias_cutoff();
    if let Some(&top) = scale_list.last() {
        if (1i64 << top) > cut {
            return arg(format!("scale 2^{top} exceeds the dealiasing cutoff {cut}; use a finer grid"));
        }
    }
    let mut report = ExperimentReport::new(
        format!("counterexample-scan/{}", serde_json::to_value(family)?.as_str().unwrap_or("family")),
        s,
        p,
        q,
        grid.dim(),
        grid.n(),
    );
    let mut table = Table::new(&["N", "ratio", "lhs", "norm_u", "norm_v"]);
    for &big_n in scale_list {
        let (u, v) = scan_pair(grid, family, s, big_n, seed)?;
        let seq = commutator_dot(bank, &u, v.components())?;
        let lhs = sequence_norm(&seq, s, p, q);
        let nu = BlockMagnitudes::new(bank, u.components())?.norm(&spec)?;
        let nv = BlockMagnitudes::new(bank, v.components())?.norm(&spec)?;
        let r = ratio(lhs, nu * nv, "commutator scan")?;
        report.record(seed, r);
        table.push(vec![big_n as f64, r, lhs, nu, nv]);
    }
    report.table = table;
    report.meta("scale_list", scale_list);
    report.meta("critical_s", 1.0 + grid.dim() as f64 / p);
    report.note("growth profile is diagnostic output; no bound is asserted");
    Ok(report)
}

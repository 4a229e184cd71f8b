//! `L^p`, Triebel-Lizorkin and Besov norms, plus ratio verifiers for the
//! equivalence, embedding and lifting inequalities.
//!
//! Every norm accepts a list of components sharing one grid; pointwise
//! quantities use the Euclidean magnitude across components, so a scalar is
//! the one-component case and `∇u` is the `d²`-component case.

mod kernel;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{arg, degenerate, Error, Result};
use crate::field::calculus::abs_derivative_power;
use crate::field::{GridField, VectorField};
use crate::lp_bank::LPFilterBank;

pub use kernel::{kernel_l1_bound, KernelBound};

/// An integrability or summability index in `[1, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ExponentRepr", into = "ExponentRepr")]
pub enum Exponent {
    Finite(f64),
    Infinite,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ExponentRepr {
    Num(f64),
    Text(String),
}

impl TryFrom<ExponentRepr> for Exponent {
    type Error = String;
    fn try_from(r: ExponentRepr) -> std::result::Result<Self, String> {
        match r {
            ExponentRepr::Num(x) => Ok(Exponent::from(x)),
            ExponentRepr::Text(t) => match t.to_ascii_lowercase().as_str() {
                "inf" | "infinity" | "∞" => Ok(Exponent::Infinite),
                other => other
                    .parse::<f64>()
                    .map(Exponent::from)
                    .map_err(|_| format!("not an exponent: {t}")),
            },
        }
    }
}

impl From<Exponent> for ExponentRepr {
    fn from(e: Exponent) -> Self {
        match e {
            Exponent::Finite(x) => ExponentRepr::Num(x),
            Exponent::Infinite => ExponentRepr::Text("inf".into()),
        }
    }
}

impl From<f64> for Exponent {
    fn from(x: f64) -> Self {
        if x.is_infinite() {
            Exponent::Infinite
        } else {
            Exponent::Finite(x)
        }
    }
}

impl Exponent {
    pub fn value(self) -> f64 {
        match self {
            Exponent::Finite(x) => x,
            Exponent::Infinite => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Exponent::Finite(_))
    }

    pub fn validate(self, name: &str) -> Result<()> {
        match self {
            Exponent::Finite(x) if !(x >= 1.0) => arg(format!("{name} must lie in [1, ∞], got {x}")),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(x) => write!(f, "{x}"),
            Exponent::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Flavor {
    TriebelLizorkin,
    Besov,
}

/// Parameters `(s, p, q)` plus the homogeneous flag and the space family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    pub s: f64,
    pub p: Exponent,
    pub q: Exponent,
    pub homogeneous: bool,
    pub flavor: Flavor,
}

impl NormSpec {
    pub fn new(s: f64, p: f64, q: f64, homogeneous: bool, flavor: Flavor) -> Result<Self> {
        let spec = Self { s, p: p.into(), q: q.into(), homogeneous, flavor };
        spec.validate()?;
        Ok(spec)
    }

    /// Inhomogeneous `F^s_{p,q}`.
    pub fn tl(s: f64, p: f64, q: f64) -> Result<Self> {
        Self::new(s, p, q, false, Flavor::TriebelLizorkin)
    }

    /// Inhomogeneous `B^s_{p,q}`.
    pub fn besov(s: f64, p: f64, q: f64) -> Result<Self> {
        Self::new(s, p, q, false, Flavor::Besov)
    }

    pub fn homogeneous(self) -> Self {
        Self { homogeneous: true, ..self }
    }

    pub fn inhomogeneous(self) -> Self {
        Self { homogeneous: false, ..self }
    }

    pub fn with_s(self, s: f64) -> Self {
        Self { s, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.s.is_finite() {
            return arg("regularity s must be finite");
        }
        self.p.validate("p")?;
        self.q.validate("q")?;
        if self.flavor == Flavor::TriebelLizorkin && !self.p.is_finite() {
            return arg("Triebel-Lizorkin norms require p < ∞");
        }
        Ok(())
    }
}

impl fmt::Display for NormSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let family = match (self.flavor, self.homogeneous) {
            (Flavor::TriebelLizorkin, false) => "F",
            (Flavor::TriebelLizorkin, true) => "Fdot",
            (Flavor::Besov, false) => "B",
            (Flavor::Besov, true) => "Bdot",
        };
        write!(f, "{family}^{}_{{{},{}}}", self.s, self.p, self.q)
    }
}

pub(crate) fn magnitudes(comps: &[GridField]) -> Vec<f64> {
    let mut acc = vec![0.0; comps[0].grid().len()];
    for c in comps {
        let phys = c.to_physical();
        for (a, v) in acc.iter_mut().zip(phys.values()) {
            *a += v.norm_sqr();
        }
    }
    acc.into_iter().map(f64::sqrt).collect()
}

fn check_components(comps: &[GridField]) -> Result<()> {
    let Some(first) = comps.first() else {
        return arg("norm of an empty component list");
    };
    if comps.iter().any(|c| c.grid() != first.grid()) {
        return arg("components live on different grids");
    }
    Ok(())
}

/// Quadrature `L^p` norm of pointwise magnitudes.
pub(crate) fn lp_of(mags: &[f64], p: f64, cell: f64) -> f64 {
    if p.is_infinite() {
        mags.iter().cloned().fold(0.0, f64::max)
    } else if p == 1.0 {
        mags.iter().sum::<f64>() * cell
    } else if p == 2.0 {
        (mags.iter().map(|m| m * m).sum::<f64>() * cell).sqrt()
    } else {
        (mags.iter().map(|m| m.powf(p)).sum::<f64>() * cell).powf(1.0 / p)
    }
}

/// `ℓ^q` norm of a finite sequence.
pub(crate) fn lq_of(values: impl Iterator<Item = f64>, q: f64) -> f64 {
    if q.is_infinite() {
        values.fold(0.0, f64::max)
    } else if q == 1.0 {
        values.sum()
    } else {
        values.map(|v| v.powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

/// `‖f‖_{L^p}` with weight `(2π/n)^d`; `p = ∞` is the sample maximum.
pub fn lp_norm(f: &GridField, p: f64) -> f64 {
    lp_norm_components(std::slice::from_ref(f), p).expect("one component")
}

pub fn lp_norm_components(comps: &[GridField], p: f64) -> Result<f64> {
    check_components(comps)?;
    Exponent::from(p).validate("p")?;
    Ok(lp_of(&magnitudes(comps), p, comps[0].grid().cell_volume()))
}

pub fn lp_norm_vector(u: &VectorField, p: f64) -> f64 {
    lp_norm_components(u.components(), p).expect("vector components share a grid")
}

/// Pointwise magnitudes of the low part and of every dyadic block of a
/// (multi-component) field. Computing these once lets several norms of the
/// same field share the transforms.
#[derive(Debug, Clone)]
pub struct BlockMagnitudes {
    cell: f64,
    low: Vec<f64>,
    blocks: Vec<Vec<f64>>,
}

impl BlockMagnitudes {
    pub fn new(bank: &LPFilterBank, comps: &[GridField]) -> Result<Self> {
        check_components(comps)?;
        if comps[0].grid() != bank.grid() {
            return arg("field grid does not match the filter bank grid");
        }
        let g = bank.grid();
        let nb = bank.j_max() + 1;
        let mut low = vec![0.0; g.len()];
        let mut blocks = vec![vec![0.0; g.len()]; nb];
        for c in comps {
            let (lo, bl) = bank.spectral_blocks(c);
            for (a, v) in low.iter_mut().zip(lo.into_physical().values()) {
                *a += v.norm_sqr();
            }
            for (acc, b) in blocks.iter_mut().zip(bl) {
                for (a, v) in acc.iter_mut().zip(b.into_physical().values()) {
                    *a += v.norm_sqr();
                }
            }
        }
        for v in low.iter_mut().chain(blocks.iter_mut().flatten()) {
            *v = v.sqrt();
        }
        Ok(Self { cell: g.cell_volume(), low, blocks })
    }

    pub fn low(&self) -> &[f64] {
        &self.low
    }

    pub fn blocks(&self) -> &[Vec<f64>] {
        &self.blocks
    }

    /// Evaluate the norm selected by `spec`.
    pub fn norm(&self, spec: &NormSpec) -> Result<f64> {
        spec.validate()?;
        let p = spec.p.value();
        let q = spec.q.value();
        let weights: Vec<f64> = (0..self.blocks.len()).map(|j| 2f64.powf(j as f64 * spec.s)).collect();
        match spec.flavor {
            Flavor::TriebelLizorkin => {
                let agg: Vec<f64> = (0..self.low.len())
                    .map(|x| {
                        let low = if spec.homogeneous { None } else { Some(self.low[x]) };
                        let terms = low
                            .into_iter()
                            .chain(self.blocks.iter().zip(&weights).map(|(b, w)| w * b[x]));
                        lq_of(terms, q)
                    })
                    .collect();
                Ok(lp_of(&agg, p, self.cell))
            }
            Flavor::Besov => {
                let low = if spec.homogeneous { None } else { Some(lp_of(&self.low, p, self.cell)) };
                let terms = low.into_iter().chain(
                    self.blocks.iter().zip(&weights).map(|(b, w)| w * lp_of(b, p, self.cell)),
                );
                Ok(lq_of(terms, q))
            }
        }
    }
}

/// Norm of a multi-component field in the space selected by `spec`.
pub fn norm_components(bank: &LPFilterBank, comps: &[GridField], spec: &NormSpec) -> Result<f64> {
    spec.validate()?;
    BlockMagnitudes::new(bank, comps)?.norm(spec)
}

pub fn norm(bank: &LPFilterBank, f: &GridField, spec: &NormSpec) -> Result<f64> {
    norm_components(bank, std::slice::from_ref(f), spec)
}

pub fn norm_vector(bank: &LPFilterBank, u: &VectorField, spec: &NormSpec) -> Result<f64> {
    norm_components(bank, u.components(), spec)
}

/// `‖f‖_{F^s_{p,q}}` (or `Ḟ`): pointwise `ℓ^q` over blocks, then `L^p`.
pub fn tl_norm(bank: &LPFilterBank, f: &GridField, spec: &NormSpec) -> Result<f64> {
    if spec.flavor != Flavor::TriebelLizorkin {
        return arg("tl_norm called with a Besov spec");
    }
    norm(bank, f, spec)
}

/// `‖f‖_{B^s_{p,q}}` (or `Ḃ`): `L^p` per block, then `ℓ^q`.
pub fn besov_norm(bank: &LPFilterBank, f: &GridField, spec: &NormSpec) -> Result<f64> {
    if spec.flavor != Flavor::Besov {
        return arg("besov_norm called with a Triebel-Lizorkin spec");
    }
    norm(bank, f, spec)
}

/// `r = ‖f‖_F / (‖f‖_{L^p} + ‖f‖_{Ḟ})` and `1/r`.
pub fn verify_equivalence(bank: &LPFilterBank, f: &GridField, s: f64, p: f64, q: f64) -> Result<(f64, f64)> {
    if !(s > 0.0) {
        return arg("equivalence requires s > 0");
    }
    let spec = NormSpec::tl(s, p, q)?;
    let mags = BlockMagnitudes::new(bank, std::slice::from_ref(f))?;
    let full = mags.norm(&spec)?;
    let denom = lp_norm(f, p) + mags.norm(&spec.homogeneous())?;
    if denom == 0.0 || full == 0.0 {
        return degenerate("zero field in equivalence check");
    }
    let r = full / denom;
    Ok((r, 1.0 / r))
}

/// `‖f‖_{Ḃ^{s₁}_{p₁,p₀}} / ‖f‖_{Ḟ^{s₀}_{p₀,q₀}}` under `s₀ − d/p₀ = s₁ − d/p₁`.
pub fn verify_embedding(
    bank: &LPFilterBank,
    f: &GridField,
    (s0, p0, q0): (f64, f64, f64),
    (s1, p1): (f64, f64),
) -> Result<f64> {
    let d = bank.grid().dim() as f64;
    if !(p0 < p1) {
        return arg("embedding requires p0 < p1");
    }
    let lhs_scale = s0 - d / p0;
    let rhs_scale = s1 - d / p1;
    if (lhs_scale - rhs_scale).abs() > 1e-12 * (1.0 + lhs_scale.abs()) {
        return arg(format!(
            "scaling relation violated: s0 - d/p0 = {lhs_scale} but s1 - d/p1 = {rhs_scale}"
        ));
    }
    let source = NormSpec::tl(s0, p0, q0)?.homogeneous();
    let target = NormSpec::besov(s1, p1, p0)?.homogeneous();
    let mags = BlockMagnitudes::new(bank, std::slice::from_ref(f))?;
    let denom = mags.norm(&source)?;
    if denom == 0.0 {
        return degenerate("zero homogeneous norm in embedding check");
    }
    Ok(mags.norm(&target)? / denom)
}

/// `‖f‖_{Ḟ^{s+k}} / ‖D^k f‖_{Ḟ^s}` and its inverse, `D = √(−Δ)`.
pub fn verify_lifting(bank: &LPFilterBank, f: &GridField, s: f64, p: f64, q: f64, k: u32) -> Result<(f64, f64)> {
    if !(k == 1 || k == 2) {
        return arg("lifting order k must be 1 or 2");
    }
    let scale = f.spectral_max();
    if f.mean().norm() > 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return arg("lifting with homogeneous norms requires a zero-mean field");
    }
    let spec = NormSpec::tl(s, p, q)?.homogeneous();
    let num = tl_norm(bank, f, &spec.with_s(s + k as f64))?;
    let dk = abs_derivative_power(f, k as f64);
    let den = tl_norm(bank, &dk, &spec)?;
    if num == 0.0 || den == 0.0 {
        return degenerate("zero field in lifting check");
    }
    Ok((num / den, den / num))
}

/// Summary of a ratio sweep, serialized as
/// `{spec, n_samples, seed, ratios[], max, median}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub spec: Vec<NormSpec>,
    pub n_samples: usize,
    pub seed: u64,
    pub ratios: Vec<f64>,
    pub max: f64,
    pub median: f64,
}

impl RatioReport {
    pub fn new(spec: Vec<NormSpec>, seed: u64, ratios: Vec<f64>) -> Result<Self> {
        if ratios.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(Error::Assertion("ratios must be finite and nonnegative".into()));
        }
        let max = ratios.iter().cloned().fold(0.0, f64::max);
        let median = median(&ratios);
        Ok(Self { spec, n_samples: ratios.len(), seed, ratios, max, median })
    }

    pub fn min(&self) -> f64 {
        self.ratios.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

pub(crate) fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

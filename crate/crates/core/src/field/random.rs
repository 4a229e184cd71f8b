//! Seeded random band-limited test fields.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::calculus::leray_project;
use super::{Grid, GridField, Repr, VectorField};
use crate::error::{arg, Result};

/// Spectral envelope `|k|^{-decay_exponent}` on the shell band
/// `k_lo <= |k| <= k_hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSpec {
    pub decay_exponent: f64,
    pub k_lo: f64,
    pub k_hi: f64,
    pub seed: u64,
}

impl SpectrumSpec {
    pub fn new(decay_exponent: f64, k_lo: f64, k_hi: f64, seed: u64) -> Self {
        Self { decay_exponent, k_lo, k_hi, seed }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    fn validate(&self, grid: &Grid) -> Result<()> {
        if !(self.k_lo >= 1.0) {
            return arg(format!("band lower edge must be >= 1, got {}", self.k_lo));
        }
        let top = (grid.n() / 2 - 1) as f64;
        if self.k_hi > top {
            return arg(format!("band upper edge {} exceeds n/2 - 1 = {top}", self.k_hi));
        }
        if self.k_hi < self.k_lo {
            return arg("empty band: k_hi < k_lo");
        }
        Ok(())
    }
}

/// Canonical representative of the pair `{k, -k}`: first nonzero component
/// positive.
fn is_canonical(k: &[i64]) -> bool {
    k.iter().find(|&&c| c != 0).is_some_and(|&c| c > 0)
}

fn draw_spectrum(grid: &Grid, spec: &SpectrumSpec, rng: &mut ChaCha8Rng) -> Result<Vec<Complex64>> {
    let normal = Normal::new(0.0, std::f64::consts::FRAC_1_SQRT_2).expect("valid normal");
    let d = grid.dim();
    let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut hits = 0usize;
    for flat in 0..grid.len() {
        let k = grid.wavevector(flat);
        if !is_canonical(&k[..d]) {
            continue;
        }
        let mag = (k[..d].iter().map(|&c| (c * c) as f64).sum::<f64>()).sqrt();
        if mag < spec.k_lo - 1e-12 || mag > spec.k_hi + 1e-12 {
            continue;
        }
        let sigma = mag.powf(-spec.decay_exponent);
        let z = Complex64::new(normal.sample(rng), normal.sample(rng)) * sigma;
        values[flat] = z;
        let neg = [-k[0], -k[1], -k[2]];
        values[grid.offset_of_wavevector(&neg)] = z.conj();
        hits += 1;
    }
    if hits == 0 {
        return arg("empty band: no lattice frequency in [k_lo, k_hi]");
    }
    Ok(values)
}

/// Real scalar field with independent complex-Gaussian coefficients of
/// standard deviation `|k|^{-α}` inside the band (physical representation).
pub fn random_scalar(grid: Grid, spec: &SpectrumSpec) -> Result<GridField> {
    spec.validate(&grid)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let values = draw_spectrum(&grid, spec, &mut rng)?;
    Ok(GridField::from_values(grid, values, Repr::Spectral, true)?.into_physical())
}

/// Real divergence-free vector field: each component drawn as in
/// [`random_scalar`] from one seeded stream, then Leray-projected.
pub fn random_vector(grid: Grid, spec: &SpectrumSpec) -> Result<VectorField> {
    spec.validate(&grid)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut comps = Vec::with_capacity(grid.dim());
    for _ in 0..grid.dim() {
        let values = draw_spectrum(&grid, spec, &mut rng)?;
        comps.push(GridField::from_values(grid, values, Repr::Spectral, true)?);
    }
    let projected = leray_project(&VectorField::new(comps)?);
    Ok(projected.to_physical())
}

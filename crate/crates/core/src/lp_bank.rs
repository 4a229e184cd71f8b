//! Dyadic partition of unity on the frequency lattice and the operators
//! `Δ_j`, `S_j = P_{≤j}` built from it.
//!
//! `φ` is radial with `φ = 1` on `|ξ| ≤ 1/2` and `φ = 0` on `|ξ| ≥ 1`;
//! `φ_m(ξ) = φ(ξ/2^m)` and `ψ_j = φ_{j+1} − φ_j`, so that
//! `φ_0 + Σ_{j=0}^{j_max} ψ_j = φ_{j_max+1} ≡ 1` on the whole lattice.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{arg, degenerate, Result};
use crate::field::{Grid, GridField, Repr};
use crate::norms::{tl_norm, Flavor, NormSpec};

/// Radial cutoff profile used to build `φ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Profile {
    /// `t ↦ h(2−2t)/(h(2−2t)+h(2t−1))` with `h(t) = exp(−1/t)` for `t > 0`.
    #[default]
    SmoothStep,
}

fn h(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

impl Profile {
    /// Radial profile evaluated at `t = |ξ|`.
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Profile::SmoothStep => {
                if t <= 0.5 {
                    1.0
                } else if t >= 1.0 {
                    0.0
                } else {
                    let a = h(2.0 - 2.0 * t);
                    let b = h(2.0 * t - 1.0);
                    a / (a + b)
                }
            }
        }
    }

    /// `φ(ξ)` for a frequency vector.
    pub fn phi(&self, xi: &[f64]) -> f64 {
        self.eval(xi.iter().map(|c| c * c).sum::<f64>().sqrt())
    }

    /// Annular bump `ψ(ξ) = φ(ξ/2) − φ(ξ)`.
    pub fn psi(&self, xi: &[f64]) -> f64 {
        let r = xi.iter().map(|c| c * c).sum::<f64>().sqrt();
        self.eval(0.5 * r) - self.eval(r)
    }
}

/// Cached `φ_m` tables on a grid's lattice, `0 ≤ m ≤ j_max + 1`.
#[derive(Debug, Clone)]
pub struct LPFilterBank {
    grid: Grid,
    j_max: usize,
    profile: Profile,
    /// `phi[m]` tabulates `φ(ξ/2^m)` in flat spectral order.
    phi: Vec<Vec<f64>>,
    psi: Vec<Vec<f64>>,
}

/// `j_max = ⌈log₂(√d · n/2)⌉ + 1`.
pub fn j_max_for(grid: &Grid) -> usize {
    let top = (grid.dim() as f64).sqrt() * (grid.n() as f64) / 2.0;
    top.log2().ceil() as usize + 1
}

impl LPFilterBank {
    pub fn new(grid: Grid, profile: Profile) -> Self {
        let j_max = j_max_for(&grid);
        let mags = grid.wavenumber_magnitudes();
        let phi: Vec<Vec<f64>> = (0..=j_max + 1)
            .map(|m| {
                let scale = 0.5f64.powi(m as i32);
                mags.iter().map(|&r| profile.eval(r * scale)).collect()
            })
            .collect();
        let psi = (0..=j_max)
            .map(|j| phi[j + 1].iter().zip(&phi[j]).map(|(a, b)| a - b).collect())
            .collect();
        Self { grid, j_max, profile, phi, psi }
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    #[inline]
    pub fn j_max(&self) -> usize {
        self.j_max
    }

    #[inline]
    pub fn profile(&self) -> Profile {
        self.profile
    }

    /// `φ_0` on the lattice.
    pub fn phi_0(&self) -> &[f64] {
        &self.phi[0]
    }

    /// `φ_m` on the lattice; `m > j_max + 1` returns the `m = j_max + 1`
    /// table, which is identically one.
    pub fn phi_m(&self, m: usize) -> &[f64] {
        &self.phi[m.min(self.j_max + 1)]
    }

    pub fn psi(&self, j: usize) -> &[f64] {
        &self.psi[j]
    }

    /// `max_ξ |φ_0 + Σ_j ψ_j − 1|` over the lattice.
    pub fn partition_residual(&self) -> f64 {
        (0..self.grid.len())
            .map(|flat| {
                let s = self.phi[0][flat] + self.psi.iter().map(|p| p[flat]).sum::<f64>();
                (s - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    fn check_grid(&self, f: &GridField) -> Result<()> {
        if f.grid() != self.grid {
            return arg("field grid does not match the filter bank grid");
        }
        Ok(())
    }

    /// `Δ_j f`, in the input's representation.
    pub fn delta_j(&self, f: &GridField, j: usize) -> Result<GridField> {
        self.check_grid(f)?;
        if j > self.j_max {
            return arg(format!("block index {j} exceeds j_max = {}", self.j_max));
        }
        Ok(f.apply_table(&self.psi[j]))
    }

    /// `P_{≤m} f = S_m f`, in the input's representation.
    pub fn p_le(&self, f: &GridField, m: usize) -> Result<GridField> {
        self.check_grid(f)?;
        if m > self.j_max {
            return Ok(f.clone());
        }
        Ok(f.apply_table(&self.phi[m]))
    }

    /// Low part and all blocks `Δ_0 … Δ_{j_max}` in physical representation.
    pub fn decompose(&self, f: &GridField) -> Result<DyadicDecomposition> {
        self.check_grid(f)?;
        let spec = f.to_spectral();
        let low = spec.apply_table(&self.phi[0]).into_physical();
        let blocks = self.psi.iter().map(|t| spec.apply_table(t).into_physical()).collect();
        Ok(DyadicDecomposition { low, blocks })
    }

    /// Blocks of the spectral derivative `∂_axis f`, obtained by
    /// differentiating each block.
    pub(crate) fn spectral_blocks(&self, f: &GridField) -> (GridField, Vec<GridField>) {
        let spec = f.to_spectral();
        let low = spec.apply_table(&self.phi[0]);
        let blocks = self.psi.iter().map(|t| spec.apply_table(t)).collect();
        (low, blocks)
    }
}

/// `P_{≤0} f` plus `Δ_j f` for `0 ≤ j ≤ j_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicDecomposition {
    pub low: GridField,
    pub blocks: Vec<GridField>,
}

impl DyadicDecomposition {
    pub fn recompose(&self) -> GridField {
        let mut acc = self.low.to_physical();
        for b in &self.blocks {
            acc = acc.add(b);
        }
        acc
    }

    /// Number of blocks carrying any coefficient above `tol` (relative to the
    /// largest block coefficient).
    pub fn active_blocks(&self, tol: f64) -> Vec<usize> {
        let maxes: Vec<f64> = self.blocks.iter().map(|b| b.spectral_max()).collect();
        let top = maxes.iter().cloned().fold(self.low.spectral_max(), f64::max);
        maxes
            .iter()
            .enumerate()
            .filter(|(_, &m)| top > 0.0 && m > tol * top)
            .map(|(j, _)| j)
            .collect()
    }
}

pub fn recompose(dec: &DyadicDecomposition) -> GridField {
    dec.recompose()
}

/// `‖P_{≤m} f‖_{F^{s+l}_{p,q}} / (2^{ml} ‖f‖_{F^s_{p,q}})`.
pub fn verify_low_freq_bound(
    bank: &LPFilterBank,
    f: &GridField,
    s: f64,
    p: f64,
    q: f64,
    m: usize,
    l: f64,
) -> Result<f64> {
    if l < 0.0 {
        return arg("l must be nonnegative");
    }
    let base = NormSpec::new(s, p, q, false, Flavor::TriebelLizorkin)?;
    let lifted = NormSpec { s: s + l, ..base };
    let denom = 2f64.powf(m as f64 * l) * tl_norm(bank, f, &base)?;
    if denom == 0.0 {
        return degenerate("zero field in low-frequency bound");
    }
    let low = bank.p_le(f, m)?;
    Ok(tl_norm(bank, &low, &lifted)? / denom)
}

/// Complex mode helper used in tests and examples: `e^{ik·x}` in physical
/// representation.
pub fn exp_mode(grid: Grid, k: &[i64]) -> GridField {
    GridField::pure_mode(grid, k, Complex64::new(1.0, 0.0)).into_repr(Repr::Physical)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::random::{random_scalar, SpectrumSpec};

    fn bank64() -> LPFilterBank {
        LPFilterBank::new(Grid::new(2, 64).unwrap(), Profile::SmoothStep)
    }

    fn rel_l2(a: &GridField, b: &GridField) -> f64 {
        let pa = a.to_physical();
        let pb = b.to_physical();
        let num: f64 = pa.values().iter().zip(pb.values()).map(|(x, y)| (x - y).norm_sqr()).sum();
        let den: f64 = pb.values().iter().map(|y| y.norm_sqr()).sum();
        if den == 0.0 {
            num.sqrt()
        } else {
            (num / den).sqrt()
        }
    }

    #[test]
    fn j_max_rule() {
        assert_eq!(bank64().j_max(), 7);
        assert_eq!(j_max_for(&Grid::new(3, 16).unwrap()), 5);
    }

    #[test]
    fn profile_plateau_and_support() {
        let p = Profile::SmoothStep;
        assert_eq!(p.phi(&[0.4, 0.0]), 1.0);
        assert_eq!(p.phi(&[1.5, 0.0]), 0.0);
        assert_eq!(p.psi(&[1.0, 0.0]), 1.0);
        for i in 0..=100 {
            let t = i as f64 / 50.0;
            let v = p.eval(t);
            assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn partition_of_unity_on_lattice() {
        let b = bank64();
        // independent evaluation: φ + Σ ψ_j straight from the profile
        let g = b.grid();
        let mut worst: f64 = 0.0;
        for flat in 0..g.len() {
            let k = g.wavevector(flat);
            let xi = [k[0] as f64, k[1] as f64];
            let mut s = Profile::SmoothStep.phi(&xi);
            for j in 0..=b.j_max() {
                let sc = 0.5f64.powi(j as i32);
                s += Profile::SmoothStep.psi(&[xi[0] * sc, xi[1] * sc]);
            }
            worst = worst.max((s - 1.0).abs());
        }
        assert!(worst <= 1e-14, "{worst}");
        assert!(b.partition_residual() <= 1e-14);
    }

    #[test]
    fn psi_tables_match_definition() {
        let b = bank64();
        let g = b.grid();
        for j in 0..=b.j_max() {
            for flat in 0..g.len() {
                let k = g.wavevector(flat);
                let xi = [k[0] as f64, k[1] as f64];
                let direct = Profile::SmoothStep.phi(&[xi[0] / 2f64.powi(j as i32 + 1), xi[1] / 2f64.powi(j as i32 + 1)])
                    - Profile::SmoothStep.phi(&[xi[0] / 2f64.powi(j as i32), xi[1] / 2f64.powi(j as i32)]);
                assert!((b.psi(j)[flat] - direct).abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn pure_mode_lands_in_one_block() {
        let b = bank64();
        let g = b.grid();
        for j in 1..=4usize {
            let f = exp_mode(g, &[1 << j, 0]);
            let dj = b.delta_j(&f, j).unwrap();
            assert!(rel_l2(&dj, &f) < 1e-14);
            for jp in 0..=b.j_max() {
                if (jp as i64 - j as i64).abs() >= 2 {
                    assert!(b.delta_j(&f, jp).unwrap().spectral_max() < 1e-15);
                }
            }
            let dec = b.decompose(&f).unwrap();
            assert_eq!(dec.active_blocks(1e-14), vec![j]);
        }
    }

    #[test]
    fn constant_and_zero_fields() {
        let b = bank64();
        let g = b.grid();
        let c = GridField::constant(g, 2.5);
        for j in 0..=b.j_max() {
            assert!(b.delta_j(&c, j).unwrap().abs_values().iter().all(|v| *v < 1e-14));
        }
        assert!(rel_l2(&b.p_le(&c, 0).unwrap(), &c) < 1e-15);
        let z = GridField::zeros(g, Repr::Physical);
        let dec = b.decompose(&z).unwrap();
        assert!(dec.blocks.iter().all(|bl| bl.spectral_max() == 0.0));
        assert!(b.delta_j(&c, 8).is_err());
    }

    #[test]
    fn telescoping_and_reconstruction() {
        let b = bank64();
        let g = b.grid();
        let f = random_scalar(g, &SpectrumSpec::new(1.0, 1.0, 31.0, 9)).unwrap();
        for j in 0..b.j_max() {
            let lhs = b.delta_j(&f, j).unwrap();
            let rhs = b.p_le(&f, j + 1).unwrap().sub(&b.p_le(&f, j).unwrap());
            let scale = f.abs_values().iter().cloned().fold(0.0, f64::max);
            let err = lhs.sub(&rhs).abs_values().iter().cloned().fold(0.0, f64::max);
            assert!(err <= 1e-13 * scale);
        }
        let dec = b.decompose(&f).unwrap();
        assert!(rel_l2(&dec.recompose(), &f) <= 1e-11);
        assert!(rel_l2(&b.p_le(&f, 8).unwrap(), &f) == 0.0);
    }

    #[test]
    fn block_support_in_annulus() {
        let b = bank64();
        let g = b.grid();
        let mags = g.wavenumber_magnitudes();
        for j in 0..=b.j_max() {
            for (flat, &r) in mags.iter().enumerate() {
                let v = b.psi(j)[flat];
                if v != 0.0 {
                    let lo = 2f64.powi(j as i32 - 1);
                    let hi = 2f64.powi(j as i32 + 1);
                    assert!(r >= lo && r <= hi, "j={j} r={r} psi={v}");
                }
            }
        }
    }

    #[test]
    fn low_freq_bound_pure_mode() {
        let b = bank64();
        let g = b.grid();
        // |k| = 2^j with j ≤ m − 1: ratio 2^{j−m}
        for (j, m) in [(1usize, 3usize), (2, 3), (2, 4), (3, 5)] {
            let f = GridField::cosine_mode(g, &[1 << j, 0]);
            let r = verify_low_freq_bound(&b, &f, 2.0, 1.0, 1.0, m, 1.0).unwrap();
            let expect = 2f64.powi(j as i32 - m as i32);
            assert!((r - expect).abs() <= 1e-12 * expect, "{r} vs {expect}");
        }
        let f = random_scalar(g, &SpectrumSpec::new(1.0, 1.0, 20.0, 2)).unwrap();
        let r = verify_low_freq_bound(&b, &f, 2.0, 2.0, 2.0, 9, 0.0).unwrap();
        assert!(r <= 1.0 + 1e-10);
        let z = GridField::zeros(g, Repr::Physical);
        assert!(verify_low_freq_bound(&b, &z, 2.0, 1.0, 1.0, 3, 1.0).is_err());
    }
}

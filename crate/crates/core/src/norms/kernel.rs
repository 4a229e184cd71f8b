//! `L¹` size of the low-frequency pressure kernel, estimated through its
//! dyadic sum `Σ_{j≤0} 2^j ‖𝓕^{-1}(m(2^jξ)ψ(ξ)ξ_i)‖_{L¹}` where `m` is the
//! symbol of `P_{≤0}(−Δ)^{−1}∂_l∂_k`.
//!
//! Each kernel is evaluated on an auxiliary box of side `L = 2^refinement`
//! with spacing `1/4`, independent of any torus grid: the periodization of
//! `K` over the box has Fourier coefficients `g(2πk/L)/L^d`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::field::fft::{transform, Direction};
use crate::lp_bank::Profile;

const SPACING: f64 = 0.25;
const TAIL_TOL: f64 = 1e-6;
/// Finest admissible frequency spacing `2π/L` relative to the width of the
/// annulus `1/2 ≤ |ξ| ≤ 2`.
const MAX_FREQ_SPACING: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelBound {
    /// Partial dyadic sum.
    pub value: f64,
    /// `(j, 2^j ‖K_j‖_{L¹})` for `j = 0, −1, …` down to the cut.
    pub terms: Vec<(i32, f64)>,
    pub refinement: u32,
    pub box_side: f64,
}

/// Partial dyadic sum for indices `l, k, i` (1-based) in dimension `d`.
pub fn kernel_l1_bound(profile: Profile, d: usize, l: usize, k: usize, i: usize, refinement: u32) -> Result<KernelBound> {
    if !(d == 2 || d == 3) {
        return arg(format!("dimension must be 2 or 3, got {d}"));
    }
    for (name, v) in [("l", l), ("k", k), ("i", i)] {
        if v < 1 || v > d {
            return arg(format!("index {name} = {v} outside 1..={d}"));
        }
    }
    if refinement > 9 || (d == 3 && refinement > 7) {
        return arg(format!("refinement {refinement} too large for an in-memory box"));
    }
    let side = 2f64.powi(refinement as i32);
    let dxi = 2.0 * std::f64::consts::PI / side;
    if dxi > MAX_FREQ_SPACING {
        return Err(Error::Resolution(format!(
            "box side {side} gives frequency spacing {dxi:.3} > {MAX_FREQ_SPACING}; raise the refinement"
        )));
    }
    let n = (side / SPACING).round() as usize;
    let mut terms = Vec::new();
    let mut value = 0.0;
    let mut j = 0i32;
    loop {
        let t = 2f64.powi(j) * kernel_l1(profile, d, (l - 1, k - 1, i - 1), j, side, n);
        terms.push((j, t));
        value += t;
        // the remaining terms form a tail no larger than the current one
        if t < TAIL_TOL || j < -60 {
            break;
        }
        j -= 1;
    }
    Ok(KernelBound { value, terms, refinement, box_side: side })
}

/// `‖𝓕^{-1}(m(2^jξ)ψ(ξ)ξ_i)‖_{L¹}` on the box.
fn kernel_l1(profile: Profile, d: usize, (l, k, i): (usize, usize, usize), j: i32, side: f64, n: usize) -> f64 {
    let len = n.pow(d as u32);
    let dxi = 2.0 * std::f64::consts::PI / side;
    let scale_j = 2f64.powi(j);
    let norm = side.powi(d as i32);
    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    let mut xi = [0.0f64; 3];
    for (flat, v) in buf.iter_mut().enumerate() {
        let mut rem = flat;
        for a in (0..d).rev() {
            let idx = rem % n;
            rem /= n;
            let kk = if idx <= n / 2 { idx as f64 } else { idx as f64 - n as f64 };
            xi[a] = kk * dxi;
        }
        let r2: f64 = xi[..d].iter().map(|c| c * c).sum();
        if r2 == 0.0 {
            continue;
        }
        let bump = profile.psi(&xi[..d]);
        if bump == 0.0 {
            continue;
        }
        let eta: Vec<f64> = xi[..d].iter().map(|c| c * scale_j).collect();
        let m = -profile.phi(&eta) * xi[l] * xi[k] / r2;
        *v = Complex64::new(m * bump * xi[i] / norm, 0.0);
    }
    transform(&mut buf, n, d, Direction::Inverse);
    let cell = SPACING.powi(d as i32);
    buf.iter().map(|z| z.norm()).sum::<f64>() * cell
}

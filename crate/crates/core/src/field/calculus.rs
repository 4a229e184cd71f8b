//! Spectral derivatives, Fourier multipliers, 2/3-rule dealiasing and the
//! Leray projection.
//!
//! Odd symbols (derivatives, Riesz-type transforms, the projection) zero
//! every coefficient whose frequency touches the Nyquist index. Even radial
//! symbols such as the Littlewood-Paley cutoffs are applied as-is.

use num_complex::Complex64;

use super::{Grid, GridField, Repr, VectorField};
use crate::error::{arg, Result};

/// Spectral partial derivative `∂_axis f`; output keeps the input
/// representation.
pub fn derivative(f: &GridField, axis: usize) -> Result<GridField> {
    let g = f.grid();
    if axis >= g.dim() {
        return arg(format!("axis {axis} out of range for a {}-d grid", g.dim()));
    }
    Ok(derivative_unchecked(f, axis))
}

pub(crate) fn derivative_unchecked(f: &GridField, axis: usize) -> GridField {
    let g = f.grid();
    f.apply_multiplier(
        |k| {
            if g.touches_nyquist(k) {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, k[axis] as f64)
            }
        },
        true,
    )
}

/// `∇f` as a vector field (not flagged divergence-free).
pub fn gradient(f: &GridField) -> VectorField {
    let comps = (0..f.grid().dim()).map(|a| derivative_unchecked(f, a)).collect();
    VectorField::new(comps).expect("gradient has d components")
}

/// `div u`.
pub fn divergence(u: &VectorField) -> GridField {
    let mut acc = derivative_unchecked(u.component(0), 0);
    for a in 1..u.dim() {
        acc = acc.add(&derivative_unchecked(u.component(a), a));
    }
    acc
}

/// `D^power f` with `D = √(-Δ)`, realized as the multiplier `|ξ|^power`.
pub fn abs_derivative_power(f: &GridField, power: f64) -> GridField {
    let g = f.grid();
    f.apply_multiplier(
        |k| {
            if g.touches_nyquist(k) {
                return Complex64::new(0.0, 0.0);
            }
            let mag2: i64 = k[..g.dim()].iter().map(|c| c * c).sum();
            if mag2 == 0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new((mag2 as f64).powf(0.5 * power), 0.0)
            }
        },
        true,
    )
}

/// Remove the zero-frequency coefficient.
pub fn remove_mean(f: &GridField) -> GridField {
    f.apply_multiplier(
        |k| {
            if k.iter().all(|&c| c == 0) {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(1.0, 0.0)
            }
        },
        true,
    )
}

/// True if the frequency survives the 2/3 rule (`|k_i| < n/3` on every axis).
#[inline]
pub fn inside_dealias_box(grid: &Grid, k: &[i64; 3]) -> bool {
    let cut = grid.dealias_cutoff();
    k[..grid.dim()].iter().all(|c| c.abs() <= cut)
}

/// Zero all spectral content outside the 2/3-rule box; returns a spectral
/// field.
pub fn dealias(f: &GridField) -> GridField {
    let g = f.grid();
    let mut s = f.to_spectral();
    truncate_in_place(&g, &mut s);
    s
}

fn truncate_in_place(g: &Grid, s: &mut GridField) {
    let is_real = s.is_real();
    let values: Vec<Complex64> = s
        .values()
        .iter()
        .enumerate()
        .map(|(flat, &v)| {
            if inside_dealias_box(g, &g.wavevector(flat)) {
                v
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    *s = GridField::from_values(*g, values, Repr::Spectral, is_real).expect("same grid");
}

/// Alias-free pointwise product: both factors are truncated to the 2/3 box,
/// multiplied in physical space, and the product is truncated again.
/// Returns a spectral field.
pub fn dealiased_product(a: &GridField, b: &GridField) -> GridField {
    assert_eq!(a.grid(), b.grid(), "grid mismatch");
    let pa = dealias(a).into_physical();
    let pb = dealias(b).into_physical();
    product_of_truncated(&pa, &pb)
}

/// Product of two physical fields already truncated to the 2/3 box.
pub(crate) fn product_of_truncated(pa: &GridField, pb: &GridField) -> GridField {
    let g = pa.grid();
    let values = pa.values().iter().zip(pb.values()).map(|(x, y)| x * y).collect();
    let prod = GridField::from_values(g, values, Repr::Physical, pa.is_real() && pb.is_real())
        .expect("same grid")
        .into_spectral();
    let mut out = prod;
    truncate_in_place(&g, &mut out);
    out
}

/// Leray projection `û(k) -> (I - kkᵀ/|k|²) û(k)`; the mean mode passes
/// through unchanged. The output is flagged divergence-free.
pub fn leray_project(u: &VectorField) -> VectorField {
    let g = u.grid();
    let d = g.dim();
    let specs: Vec<GridField> = u.components().iter().map(|c| c.to_spectral()).collect();
    let mut out: Vec<Vec<Complex64>> = specs.iter().map(|s| s.values().to_vec()).collect();
    for flat in 0..g.len() {
        let k = g.wavevector(flat);
        let mag2: i64 = k[..d].iter().map(|c| c * c).sum();
        if mag2 == 0 {
            continue;
        }
        if g.touches_nyquist(&k) {
            for comp in out.iter_mut() {
                comp[flat] = Complex64::new(0.0, 0.0);
            }
            continue;
        }
        let mut kdotu = Complex64::new(0.0, 0.0);
        for a in 0..d {
            kdotu += specs[a].values()[flat] * k[a] as f64;
        }
        let coef = kdotu / mag2 as f64;
        for a in 0..d {
            out[a][flat] = specs[a].values()[flat] - coef * k[a] as f64;
        }
    }
    let comps = out
        .into_iter()
        .zip(u.components())
        .map(|(vals, orig)| {
            GridField::from_values(g, vals, Repr::Spectral, orig.is_real())
                .expect("same grid")
                .into_repr(orig.repr())
        })
        .collect();
    VectorField::new(comps).expect("same shape").with_div_free(true)
}

//! Periodic grids, sampled fields, discrete Fourier transforms and the
//! spectral calculus shared by every other module.
//!
//! Spectral coefficients are Fourier-series coefficients:
//! `f(x) = Σ_k f̂(k) e^{ik·x}` with `f̂(k) = n^{-d} Σ_x f(x) e^{-ik·x}`, so that
//! `‖f‖²_{L²} = (2π)^d Σ_k |f̂(k)|²` and the physical Riemann sum with weight
//! `(2π/n)^d` reproduces the same value exactly.

pub mod calculus;
pub mod fft;
mod grid;
pub mod io;
pub mod random;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
pub use grid::Grid;

/// Divergence tolerance (relative to the largest coefficient) used when an
/// operation requires a divergence-free input.
pub const DIV_FREE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Repr {
    Physical,
    Spectral,
}

/// One scalar field (or one vector component) sampled on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    grid: Grid,
    values: Vec<Complex64>,
    repr: Repr,
    is_real: bool,
}

impl GridField {
    pub fn from_values(grid: Grid, values: Vec<Complex64>, repr: Repr, is_real: bool) -> Result<Self> {
        if values.len() != grid.len() {
            return arg(format!(
                "expected {} samples for the grid, got {}",
                grid.len(),
                values.len()
            ));
        }
        Ok(Self { grid, values, repr, is_real })
    }

    pub fn from_real(grid: Grid, values: &[f64]) -> Result<Self> {
        let v = values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_values(grid, v, Repr::Physical, true)
    }

    /// Real physical field sampled from a closure of the coordinates.
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|flat| {
                let x = grid.position(flat);
                Complex64::new(f(&x[..grid.dim()]), 0.0)
            })
            .collect();
        Self { grid, values, repr: Repr::Physical, is_real: true }
    }

    /// Complex physical field sampled from a closure of the coordinates.
    pub fn from_complex_fn(grid: Grid, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let values = (0..grid.len())
            .map(|flat| {
                let x = grid.position(flat);
                f(&x[..grid.dim()])
            })
            .collect();
        Self { grid, values, repr: Repr::Physical, is_real: false }
    }

    pub fn zeros(grid: Grid, repr: Repr) -> Self {
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
            repr,
            is_real: true,
        }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Self {
            grid,
            values: vec![Complex64::new(c, 0.0); grid.len()],
            repr: Repr::Physical,
            is_real: true,
        }
    }

    /// Single Fourier mode `amplitude · e^{ik·x}` (complex-valued).
    pub fn pure_mode(grid: Grid, k: &[i64], amplitude: Complex64) -> Self {
        let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
        values[grid.offset_of_wavevector(k)] = amplitude;
        Self { grid, values, repr: Repr::Spectral, is_real: false }
    }

    /// Real mode `2cos(k·x) = e^{ik·x} + e^{-ik·x}`.
    pub fn cosine_mode(grid: Grid, k: &[i64]) -> Self {
        let neg: Vec<i64> = k.iter().map(|c| -c).collect();
        let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
        values[grid.offset_of_wavevector(k)] += Complex64::new(1.0, 0.0);
        values[grid.offset_of_wavevector(&neg)] += Complex64::new(1.0, 0.0);
        Self { grid, values, repr: Repr::Spectral, is_real: true }
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    #[inline]
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    #[inline]
    pub fn repr(&self) -> Repr {
        self.repr
    }

    #[inline]
    pub fn is_real(&self) -> bool {
        self.is_real
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn to_spectral(&self) -> GridField {
        match self.repr {
            Repr::Spectral => self.clone(),
            Repr::Physical => forward_unchecked(self.clone()),
        }
    }

    pub fn to_physical(&self) -> GridField {
        match self.repr {
            Repr::Physical => self.clone(),
            Repr::Spectral => inverse_unchecked(self.clone()),
        }
    }

    pub fn into_spectral(self) -> GridField {
        match self.repr {
            Repr::Spectral => self,
            Repr::Physical => forward_unchecked(self),
        }
    }

    pub fn into_physical(self) -> GridField {
        match self.repr {
            Repr::Physical => self,
            Repr::Spectral => inverse_unchecked(self),
        }
    }

    pub fn into_repr(self, repr: Repr) -> GridField {
        match repr {
            Repr::Physical => self.into_physical(),
            Repr::Spectral => self.into_spectral(),
        }
    }

    /// Multiply every spectral coefficient by `m(k)`; output keeps the input
    /// representation.
    pub fn apply_multiplier(&self, m: impl Fn(&[i64; 3]) -> Complex64, keeps_real: bool) -> GridField {
        let repr = self.repr;
        let mut spec = self.to_spectral();
        let grid = self.grid;
        for (flat, v) in spec.values.iter_mut().enumerate() {
            let k = grid.wavevector(flat);
            *v *= m(&k);
        }
        spec.is_real = self.is_real && keeps_real;
        spec.into_repr(repr)
    }

    /// Same as [`apply_multiplier`](Self::apply_multiplier) with a real
    /// multiplier tabulated in flat spectral order.
    pub fn apply_table(&self, table: &[f64]) -> GridField {
        debug_assert_eq!(table.len(), self.grid.len());
        let repr = self.repr;
        let mut spec = self.to_spectral();
        for (v, &m) in spec.values.iter_mut().zip(table) {
            *v *= m;
        }
        spec.into_repr(repr)
    }

    pub fn scale(&self, a: f64) -> GridField {
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= a;
        }
        out
    }

    fn combine(&self, other: &GridField, f: impl Fn(Complex64, Complex64) -> Complex64) -> GridField {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        let rhs = other.clone().into_repr(self.repr);
        let values = self.values.iter().zip(&rhs.values).map(|(&a, &b)| f(a, b)).collect();
        GridField {
            grid: self.grid,
            values,
            repr: self.repr,
            is_real: self.is_real && other.is_real,
        }
    }

    /// `self + other` in `self`'s representation.
    pub fn add(&self, other: &GridField) -> GridField {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &GridField) -> GridField {
        self.combine(other, |a, b| a - b)
    }

    /// `self + a·other`.
    pub fn axpy(&self, a: f64, other: &GridField) -> GridField {
        self.combine(other, |x, y| x + y * a)
    }

    /// Pointwise moduli `|f(x)|` of the physical samples.
    pub fn abs_values(&self) -> Vec<f64> {
        match self.repr {
            Repr::Physical => self.values.iter().map(|v| v.norm()).collect(),
            Repr::Spectral => self.to_physical().values.iter().map(|v| v.norm()).collect(),
        }
    }

    /// Real parts of the physical samples.
    pub fn real_values(&self) -> Vec<f64> {
        let phys = self.to_physical();
        phys.values.iter().map(|v| v.re).collect()
    }

    /// Zero-frequency coefficient (the mean value).
    pub fn mean(&self) -> Complex64 {
        match self.repr {
            Repr::Spectral => self.values[0],
            Repr::Physical => {
                let s: Complex64 = self.values.iter().sum();
                s / self.grid.len() as f64
            }
        }
    }

    /// Largest spectral coefficient modulus.
    pub fn spectral_max(&self) -> f64 {
        let spec = self.to_spectral();
        spec.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// Largest `|F(-k) - conj F(k)|` over the lattice, relative to the
    /// largest coefficient (zero for a real field).
    pub fn hermitian_defect(&self) -> f64 {
        let spec = self.to_spectral();
        let g = self.grid;
        let scale = spec.values.iter().fold(0.0f64, |m, v| m.max(v.norm()));
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for flat in 0..g.len() {
            let k = g.wavevector(flat);
            let neg = [-k[0], -k[1], -k[2]];
            let other = spec.values[g.offset_of_wavevector(&neg)];
            worst = worst.max((other - spec.values[flat].conj()).norm());
        }
        worst / scale
    }

    /// Largest frequency magnitude carrying a coefficient above
    /// `rel_tol · max|f̂|`.
    pub fn spectral_radius(&self, rel_tol: f64) -> f64 {
        let spec = self.to_spectral();
        let g = self.grid;
        let scale = spec.values.iter().fold(0.0f64, |m, v| m.max(v.norm()));
        let mut r: f64 = 0.0;
        for (flat, v) in spec.values.iter().enumerate() {
            if v.norm() > rel_tol * scale {
                let k = g.wavevector(flat);
                let mag = (k[..g.dim()].iter().map(|&c| (c * c) as f64).sum::<f64>()).sqrt();
                r = r.max(mag);
            }
        }
        r
    }

    pub(crate) fn set_real(mut self, is_real: bool) -> Self {
        self.is_real = is_real;
        self
    }
}

fn forward_unchecked(mut f: GridField) -> GridField {
    let g = f.grid;
    fft::transform(&mut f.values, g.n(), g.dim(), fft::Direction::Forward);
    let scale = 1.0 / g.len() as f64;
    for v in &mut f.values {
        *v *= scale;
    }
    f.repr = Repr::Spectral;
    f
}

fn inverse_unchecked(mut f: GridField) -> GridField {
    let g = f.grid;
    fft::transform(&mut f.values, g.n(), g.dim(), fft::Direction::Inverse);
    if f.is_real {
        for v in &mut f.values {
            v.im = 0.0;
        }
    }
    f.repr = Repr::Physical;
    f
}

/// Physical samples to Fourier-series coefficients.
pub fn dft_forward(f: &GridField) -> Result<GridField> {
    if f.repr != Repr::Physical {
        return Err(Error::Representation { expected: "physical" });
    }
    Ok(forward_unchecked(f.clone()))
}

/// Fourier-series coefficients to physical samples.
pub fn dft_inverse(f: &GridField) -> Result<GridField> {
    if f.repr != Repr::Spectral {
        return Err(Error::Representation { expected: "spectral" });
    }
    Ok(inverse_unchecked(f.clone()))
}

/// `d` scalar components on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    components: Vec<GridField>,
    div_free: bool,
}

impl VectorField {
    pub fn new(components: Vec<GridField>) -> Result<Self> {
        let Some(first) = components.first() else {
            return arg("vector field needs at least one component");
        };
        let g = first.grid();
        if components.len() != g.dim() {
            return arg(format!(
                "vector field on a {}-d grid needs {} components, got {}",
                g.dim(),
                g.dim(),
                components.len()
            ));
        }
        if components.iter().any(|c| c.grid() != g) {
            return arg("vector components live on different grids");
        }
        Ok(Self { components, div_free: false })
    }

    /// Build and mark divergence-free after checking the spectral divergence.
    pub fn new_div_free(components: Vec<GridField>) -> Result<Self> {
        let mut v = Self::new(components)?;
        let ratio = v.divergence_ratio();
        if ratio > DIV_FREE_TOL {
            return arg(format!("field is not divergence-free (relative divergence {ratio:.3e})"));
        }
        v.div_free = true;
        Ok(v)
    }

    pub fn zeros(grid: Grid, repr: Repr) -> Self {
        Self {
            components: (0..grid.dim()).map(|_| GridField::zeros(grid, repr)).collect(),
            div_free: true,
        }
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.components[0].grid()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.components.len()
    }

    #[inline]
    pub fn components(&self) -> &[GridField] {
        &self.components
    }

    #[inline]
    pub fn component(&self, i: usize) -> &GridField {
        &self.components[i]
    }

    #[inline]
    pub fn div_free(&self) -> bool {
        self.div_free
    }

    pub fn into_components(self) -> Vec<GridField> {
        self.components
    }

    pub(crate) fn with_div_free(mut self, flag: bool) -> Self {
        self.div_free = flag;
        self
    }

    /// `max_k |Σ_i k_i û_i(k)| / max_{i,k} |û_i(k)|` (zero for the zero field).
    pub fn divergence_ratio(&self) -> f64 {
        let g = self.grid();
        let specs: Vec<GridField> = self.components.iter().map(|c| c.to_spectral()).collect();
        let scale = specs.iter().map(|s| s.spectral_max()).fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for flat in 0..g.len() {
            let k = g.wavevector(flat);
            if g.touches_nyquist(&k) {
                continue;
            }
            let mut div = Complex64::new(0.0, 0.0);
            for (a, s) in specs.iter().enumerate() {
                div += s.values()[flat] * k[a] as f64;
            }
            worst = worst.max(div.norm());
        }
        worst / scale
    }

    pub(crate) fn require_div_free(&self, what: &str) -> Result<()> {
        let ratio = self.divergence_ratio();
        if ratio > DIV_FREE_TOL {
            return arg(format!("{what} must be divergence-free (relative divergence {ratio:.3e})"));
        }
        Ok(())
    }

    pub fn map(&self, f: impl Fn(&GridField) -> GridField) -> VectorField {
        VectorField {
            components: self.components.iter().map(f).collect(),
            div_free: false,
        }
    }

    pub fn to_spectral(&self) -> VectorField {
        self.map(|c| c.to_spectral()).with_div_free(self.div_free)
    }

    pub fn to_physical(&self) -> VectorField {
        self.map(|c| c.to_physical()).with_div_free(self.div_free)
    }

    pub fn scale(&self, a: f64) -> VectorField {
        self.map(|c| c.scale(a)).with_div_free(self.div_free)
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.add(b))
            .collect();
        VectorField { components, div_free: self.div_free && other.div_free }
    }

    pub fn sub(&self, other: &VectorField) -> VectorField {
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.sub(b))
            .collect();
        VectorField { components, div_free: self.div_free && other.div_free }
    }

    pub fn axpy(&self, a: f64, other: &VectorField) -> VectorField {
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(x, y)| x.axpy(a, y))
            .collect();
        VectorField { components, div_free: self.div_free && other.div_free }
    }

    /// Largest pointwise Euclidean magnitude.
    pub fn max_magnitude(&self) -> f64 {
        let phys: Vec<Vec<f64>> = self.components.iter().map(|c| c.abs_values()).collect();
        (0..self.grid().len())
            .map(|i| phys.iter().map(|c| c[i] * c[i]).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }
}

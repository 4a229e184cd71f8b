//! Discrete centered Hardy-Littlewood maximal function on the torus and the
//! pointwise and vector-valued estimates built on it.
//!
//! Cube windows use separable periodic box sums. Ball windows accumulate
//! shifted copies in order of increasing displacement, which gives the exact
//! discrete ball averages for every requested radius.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{arg, degenerate, Result};
use crate::field::fft::{transform, Direction};
use crate::field::{Grid, GridField, Repr};
use crate::lp_bank::LPFilterBank;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Window {
    Cube,
    Ball,
}

/// Radii over which averages are taken. The single-cell window (radius
/// zero) is always included in addition to `radii`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaximalConfig {
    pub radii: Vec<f64>,
    pub window: Window,
}

impl MaximalConfig {
    /// Radii `π·2^{−j}` from the grid spacing up to the half period.
    pub fn dyadic(grid: Grid, window: Window) -> Self {
        let h = grid.spacing();
        let mut radii = Vec::new();
        let mut r = std::f64::consts::PI;
        while r >= h * (1.0 - 1e-12) {
            radii.push(r);
            r *= 0.5;
        }
        radii.reverse();
        Self { radii, window }
    }

    /// Every distinct lattice distance of the torus: with ball windows this
    /// realizes the supremum over all radii exactly.
    pub fn every_radius(grid: Grid, window: Window) -> Self {
        let mut d2: Vec<i64> = offsets(grid).iter().map(|o| o.dist2).collect();
        d2.sort_unstable();
        d2.dedup();
        let h = grid.spacing();
        let radii = d2.into_iter().filter(|&v| v > 0).map(|v| (v as f64).sqrt() * h).collect();
        Self { radii, window }
    }

    pub fn validate(&self, grid: Grid) -> Result<()> {
        if self.radii.windows(2).any(|w| !(w[0] < w[1])) {
            return arg("maximal radii must be strictly increasing");
        }
        if let Some(&r0) = self.radii.first() {
            if r0 < grid.spacing() * (1.0 - 1e-12) {
                return arg("smallest maximal radius is below the grid spacing");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct Offset {
    idx: [i64; 3],
    dist2: i64,
}

/// Minimal-image displacements, sorted by distance then lexicographically.
fn offsets(grid: Grid) -> Vec<Offset> {
    let d = grid.dim();
    let mut out: Vec<Offset> = (0..grid.len())
        .map(|flat| {
            let k = grid.wavevector(flat);
            let dist2 = k[..d].iter().map(|c| c * c).sum();
            Offset { idx: k, dist2 }
        })
        .collect();
    out.sort_by(|a, b| a.dist2.cmp(&b.dist2).then(a.idx.cmp(&b.idx)));
    out
}

fn shifted_index(grid: &Grid, flat: usize, off: &[i64; 3]) -> usize {
    let mut idx = [0usize; 3];
    grid.unravel(flat, &mut idx);
    let k = [idx[0] as i64 - off[0], idx[1] as i64 - off[1], idx[2] as i64 - off[2]];
    grid.offset_of_wavevector(&k)
}

/// Periodic sum over a window of `width` cells centred on each sample, along
/// one axis.
fn box_sum_axis(values: &[f64], n: usize, d: usize, axis: usize, half: usize) -> Vec<f64> {
    let width = (2 * half + 1).min(n);
    let stride = n.pow((d - 1 - axis) as u32);
    let mut out = vec![0.0; values.len()];
    let lines = values.len() / n;
    for line in 0..lines {
        let outer = line / stride;
        let inner = line % stride;
        let base = outer * stride * n + inner;
        let at = |i: usize| base + (i % n) * stride;
        if width == n {
            let total: f64 = (0..n).map(|i| values[at(i)]).sum();
            for i in 0..n {
                out[at(i)] = total;
            }
            continue;
        }
        // window [i − half, i + half]
        let mut s: f64 = (0..width).map(|t| values[at(t + n - half)]).sum();
        for i in 0..n {
            out[at(i)] = s;
            s += values[at(i + half + 1)] - values[at(i + n - half)];
        }
    }
    out
}

/// Discrete maximal function of nonnegative samples.
pub fn maximal_of_values(grid: Grid, values: &[f64], cfg: &MaximalConfig) -> Vec<f64> {
    let mut out = values.to_vec();
    match cfg.window {
        Window::Cube => {
            let h = grid.spacing();
            let d = grid.dim();
            let mut last_half = usize::MAX;
            for &r in &cfg.radii {
                let half = ((r / h) + 1e-9).floor() as usize;
                if half == last_half || half == 0 {
                    continue;
                }
                last_half = half;
                let mut sums = values.to_vec();
                for axis in 0..d {
                    sums = box_sum_axis(&sums, grid.n(), d, axis, half);
                }
                let count = ((2 * half + 1).min(grid.n()) as f64).powi(d as i32);
                for (o, s) in out.iter_mut().zip(&sums) {
                    *o = o.max(s / count);
                }
            }
        }
        Window::Ball => {
            let h = grid.spacing();
            let offs = offsets(grid);
            let mut sums = vec![0.0; values.len()];
            let mut used = 0usize;
            for &r in &cfg.radii {
                let lim = (r / h) * (r / h) * (1.0 + 1e-12);
                let start = used;
                while used < offs.len() && (offs[used].dist2 as f64) <= lim {
                    used += 1;
                }
                if used == start {
                    continue;
                }
                for o in &offs[start..used] {
                    for (flat, s) in sums.iter_mut().enumerate() {
                        *s += values[shifted_index(&grid, flat, &o.idx)];
                    }
                }
                let count = used as f64;
                for (o, s) in out.iter_mut().zip(&sums) {
                    *o = o.max(s / count);
                }
            }
        }
    }
    out
}

/// `Mf` as a real physical field (averages of `|f|`).
pub fn hl_maximal(f: &GridField, cfg: &MaximalConfig) -> GridField {
    let g = f.grid();
    let m = maximal_of_values(g, &f.abs_values(), cfg);
    GridField::from_real(g, &m).expect("same grid")
}

fn powered(values: &[f64], e: f64) -> Vec<f64> {
    values
        .iter()
        .map(|&v| if e == 0.0 { 1.0 } else { v.powf(e) })
        .collect()
}

/// Band-limit radius factor: `f` counts as supported in `B(c·2^j)`.
pub const SUPPORT_FACTOR: f64 = 2.0;
/// Admissible lag `j > k − L`.
pub const LAG: i64 = 5;

/// `max_x |ψ_k∗f|(x) / (2^{(j−k)θd/r} M(|f|^{1−θ})(x) [M(|f|^r)(x)]^{θ/r})`,
/// with `ψ_k∗f = Δ_k f`.
pub fn verify_pointwise_bound(
    bank: &LPFilterBank,
    f: &GridField,
    j: usize,
    k: usize,
    theta: f64,
    r: f64,
    cfg: &MaximalConfig,
) -> Result<f64> {
    if !(theta > 0.0 && theta <= 1.0) {
        return arg("θ must lie in (0, 1]");
    }
    if !(r > 0.0 && r <= 1.0) {
        return arg("r must lie in (0, 1]");
    }
    if !((j as i64) > k as i64 - LAG) {
        return arg(format!("lag condition j > k − {LAG} violated (j = {j}, k = {k})"));
    }
    let radius = f.spectral_radius(1e-12);
    let bound = SUPPORT_FACTOR * 2f64.powi(j as i32);
    if radius > bound {
        return arg(format!("spectral support radius {radius} exceeds {bound}"));
    }
    let g = f.grid();
    let d = g.dim() as f64;
    let lhs = bank.delta_j(f, k)?.abs_values();
    let absf = f.abs_values();
    if absf.iter().all(|&v| v == 0.0) {
        return degenerate("zero field in pointwise maximal bound");
    }
    let m1 = maximal_of_values(g, &powered(&absf, 1.0 - theta), cfg);
    let mr = maximal_of_values(g, &powered(&absf, r), cfg);
    let pref = 2f64.powf((j as f64 - k as f64) * theta * d / r);
    let mut worst: f64 = 0.0;
    for x in 0..g.len() {
        let rhs = pref * m1[x] * mr[x].powf(theta / r);
        if lhs[x] == 0.0 {
            continue;
        }
        if rhs == 0.0 {
            return degenerate("right-hand side vanishes where the block does not");
        }
        worst = worst.max(lhs[x] / rhs);
    }
    Ok(worst)
}

/// `sup_y |f(x−y)| / (1 + |R y|^{a})` over minimal-image displacements `y`.
pub fn peetre_maximal(f: &GridField, big_r: f64, a: f64) -> Vec<f64> {
    let g = f.grid();
    let absf = f.abs_values();
    let h = g.spacing();
    let offs = offsets(g);
    let weights: Vec<f64> = offs
        .iter()
        .map(|o| 1.0 / (1.0 + (big_r * h * (o.dist2 as f64).sqrt()).powf(a)))
        .collect();
    (0..g.len())
        .map(|x| {
            offs.iter()
                .zip(&weights)
                .map(|(o, w)| absf[shifted_index(&g, x, &o.idx)] * w)
                .fold(0.0, f64::max)
        })
        .collect()
}

/// `max_x sup_y |f(x−y)|/(1+|2^j y|^{d/r}) / [M(|f|^r)(x)]^{1/r}` for `f`
/// supported in `B(2^j)`.
pub fn verify_peetre_bound(f: &GridField, j: u32, r: f64, cfg: &MaximalConfig) -> Result<f64> {
    if !(r > 0.0) {
        return arg("r must be positive");
    }
    let g = f.grid();
    let big_r = 2f64.powi(j as i32);
    if f.spectral_radius(1e-12) > big_r {
        return arg("field is not supported in B(2^j)");
    }
    let lhs = peetre_maximal(f, big_r, g.dim() as f64 / r);
    let mr = maximal_of_values(g, &powered(&f.abs_values(), r), cfg);
    let mut worst: f64 = 0.0;
    for x in 0..g.len() {
        if lhs[x] == 0.0 {
            continue;
        }
        let rhs = mr[x].powf(1.0 / r);
        if rhs == 0.0 {
            return degenerate("maximal function vanishes");
        }
        worst = worst.max(lhs[x] / rhs);
    }
    if worst == 0.0 {
        return degenerate("zero field in Peetre bound");
    }
    Ok(worst)
}

/// Convolution kernel `ψ` with radial decreasing majorant `g`, `|ψ| ≤ g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum KernelProfile {
    /// `ψ = g = (2π)^{−d/2} e^{−|x|²/2}`.
    Gaussian,
    /// `ψ = g = (1+|x|)^{−exponent}`; integrable iff `exponent > d`.
    PowerLaw { exponent: f64 },
    /// `ψ = e^{−|x|²/2} cos(ω x₁)·(2π)^{−d/2}`, majorant the Gaussian.
    ModulatedGaussian { frequency: f64 },
}

impl KernelProfile {
    fn majorant(&self, r: f64, d: usize) -> f64 {
        match *self {
            KernelProfile::Gaussian | KernelProfile::ModulatedGaussian { .. } => {
                (-0.5 * r * r).exp() / (2.0 * std::f64::consts::PI).powf(d as f64 / 2.0)
            }
            KernelProfile::PowerLaw { exponent } => (1.0 + r).powf(-exponent),
        }
    }

    fn value(&self, x: &[f64]) -> f64 {
        let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
        let g = self.majorant(r, x.len());
        match *self {
            KernelProfile::ModulatedGaussian { frequency } => g * (frequency * x[0]).cos(),
            _ => g,
        }
    }

    fn validate(&self, d: usize) -> Result<()> {
        if let KernelProfile::PowerLaw { exponent } = *self {
            if !(exponent > d as f64) {
                return arg(format!("power-law majorant with exponent {exponent} is not integrable in {d} dimensions"));
            }
        }
        Ok(())
    }
}

fn circular_convolve(grid: Grid, kernel: &[f64], values: &[f64]) -> Vec<f64> {
    let (n, d) = (grid.n(), grid.dim());
    let mut a: Vec<Complex64> = kernel.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mut b: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    transform(&mut a, n, d, Direction::Forward);
    transform(&mut b, n, d, Direction::Forward);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= y;
    }
    transform(&mut a, n, d, Direction::Inverse);
    let scale = 1.0 / grid.len() as f64;
    a.iter().map(|z| z.re * scale).collect()
}

/// `max_{x,ε} |ψ_ε∗f|(x) / (C_ε · Mf(x))` with `C_ε` the discrete `L¹` norm
/// of `g_ε` and `M` the exact discrete ball maximal function.
pub fn verify_radial_majorant(profile: KernelProfile, f: &GridField, eps_list: &[f64]) -> Result<f64> {
    let g = f.grid();
    let d = g.dim();
    profile.validate(d)?;
    if eps_list.iter().any(|&e| !(e > 0.0)) {
        return arg("ε values must be positive");
    }
    let absf = f.abs_values();
    if absf.iter().all(|&v| v == 0.0) {
        return degenerate("zero field in radial majorant check");
    }
    let real: Vec<f64> = f.real_values();
    let mf = maximal_of_values(g, &absf, &MaximalConfig::every_radius(g, Window::Ball));
    let h = g.spacing();
    let cell = g.cell_volume();
    let mut worst: f64 = 0.0;
    for &eps in eps_list {
        let mut kernel = vec![0.0; g.len()];
        let mut c = 0.0;
        for (flat, kv) in kernel.iter_mut().enumerate() {
            let k = g.wavevector(flat);
            let y: Vec<f64> = k[..d].iter().map(|&c| c as f64 * h / eps).collect();
            let scale = eps.powi(-(d as i32)) * cell;
            *kv = profile.value(&y) * scale;
            let r = y.iter().map(|c| c * c).sum::<f64>().sqrt();
            c += profile.majorant(r, d) * scale;
        }
        let conv = if f.is_real() {
            circular_convolve(g, &kernel, &real)
        } else {
            // complex input: bound real and imaginary parts jointly
            let im: Vec<f64> = f.to_physical().values().iter().map(|v| v.im).collect();
            let re = circular_convolve(g, &kernel, &real);
            let imc = circular_convolve(g, &kernel, &im);
            re.iter().zip(&imc).map(|(a, b)| a.hypot(*b)).collect()
        };
        for x in 0..g.len() {
            if mf[x] > 0.0 {
                worst = worst.max(conv[x].abs() / (c * mf[x]));
            }
        }
    }
    Ok(worst)
}

/// `‖(Σ_j (Mf_j)^q)^{1/q}‖_{L^p} / ‖(Σ_j |f_j|^q)^{1/q}‖_{L^p}`.
pub fn verify_fefferman_stein(fields: &[GridField], p: f64, q: f64, cfg: &MaximalConfig) -> Result<f64> {
    let Some(first) = fields.first() else {
        return arg("empty family");
    };
    let g = first.grid();
    if fields.iter().any(|f| f.grid() != g) {
        return arg("family members live on different grids");
    }
    let both_inf = p.is_infinite() && q.is_infinite();
    if !(both_inf || (p > 1.0 && p.is_finite() && q > 1.0)) {
        return arg(format!("vector-valued maximal inequality needs p, q > 1 (or p = q = ∞), got p = {p}, q = {q}"));
    }
    cfg.validate(g)?;
    let absf: Vec<Vec<f64>> = fields.iter().map(|f| f.abs_values()).collect();
    let maxes: Vec<Vec<f64>> = absf.iter().map(|v| maximal_of_values(g, v, cfg)).collect();
    let mixed = |family: &[Vec<f64>]| -> f64 {
        let agg: Vec<f64> = (0..g.len())
            .map(|x| {
                if q.is_infinite() {
                    family.iter().map(|f| f[x]).fold(0.0, f64::max)
                } else {
                    family.iter().map(|f| f[x].powf(q)).sum::<f64>().powf(1.0 / q)
                }
            })
            .collect();
        if p.is_infinite() {
            agg.into_iter().fold(0.0, f64::max)
        } else {
            (agg.iter().map(|a| a.powf(p)).sum::<f64>() * g.cell_volume()).powf(1.0 / p)
        }
    };
    let rhs = mixed(&absf);
    if rhs == 0.0 {
        return degenerate("zero family in Fefferman-Stein check");
    }
    Ok(mixed(&maxes) / rhs)
}

/// Single-cell spike of height one at the origin.
pub fn spike(grid: Grid) -> GridField {
    let mut v = vec![Complex64::new(0.0, 0.0); grid.len()];
    v[0] = Complex64::new(1.0, 0.0);
    GridField::from_values(grid, v, Repr::Physical, true).expect("grid length")
}

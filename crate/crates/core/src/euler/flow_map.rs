//! Lagrangian particle map `∂_t X(α,t) = v(X(α,t), t)`, `X(α,0) = α`.
//!
//! Velocity between stored states is interpolated linearly in time and by
//! the trigonometric interpolant in space, so the interpolated field is
//! divergence-free at every instant and the exact map preserves volume.

use num_complex::Complex64;
use rayon::prelude::*;

use super::Trajectory;
use crate::error::{arg, Result};
use crate::field::{Grid, VectorField};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowMapOptions {
    /// Largest particle time step.
    pub max_dt: f64,
    /// Seed every `seed_stride`-th grid point along each axis.
    pub seed_stride: usize,
    /// Seed offset for the Jacobian finite differences.
    pub fd_delta: f64,
}

impl Default for FlowMapOptions {
    fn default() -> Self {
        Self { max_dt: 1e-2, seed_stride: 1, fd_delta: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowMap {
    pub times: Vec<f64>,
    /// Seed points `α` (unwrapped coordinates).
    pub seeds: Vec<[f64; 3]>,
    /// `positions[t][i] = X(α_i, times[t])`, not reduced modulo `2π`.
    pub positions: Vec<Vec<[f64; 3]>>,
}

impl FlowMap {
    /// `X(α,t) − α` for every seed at `times[t]`.
    pub fn displacement(&self, t: usize) -> Vec<[f64; 3]> {
        self.positions[t]
            .iter()
            .zip(&self.seeds)
            .map(|(x, a)| [x[0] - a[0], x[1] - a[1], x[2] - a[2]])
            .collect()
    }
}

/// Nonzero Fourier modes of one velocity state, ready for point evaluation.
struct ModeSet {
    n: usize,
    d: usize,
    /// wavevector (shifted to `0..n`) and per-component coefficients
    modes: Vec<([usize; 3], [Complex64; 3])>,
}

impl ModeSet {
    fn new(u: &VectorField) -> Self {
        let g = u.grid();
        let d = g.dim();
        let specs: Vec<_> = u.components().iter().map(|c| c.to_spectral()).collect();
        let scale = specs.iter().map(|s| s.spectral_max()).fold(0.0, f64::max);
        let half = (g.n() / 2) as i64;
        let mut modes = Vec::new();
        for flat in 0..g.len() {
            let k = g.wavevector(flat);
            // the Nyquist plane has no unambiguous real interpolant
            if g.touches_nyquist(&k) {
                continue;
            }
            let mut c = [Complex64::new(0.0, 0.0); 3];
            let mut keep = false;
            for a in 0..d {
                c[a] = specs[a].values()[flat];
                keep |= c[a].norm() > 1e-15 * scale;
            }
            if keep {
                let mut idx = [0usize; 3];
                for a in 0..d {
                    idx[a] = (k[a] + half) as usize;
                }
                modes.push((idx, c));
            }
        }
        Self { n: g.n(), d, modes }
    }

    fn eval(&self, x: &[f64; 3]) -> [f64; 3] {
        let half = (self.n / 2) as i64;
        let mut tables = [[Complex64::new(0.0, 0.0); 0].to_vec(), Vec::new(), Vec::new()];
        for a in 0..self.d {
            let base = Complex64::from_polar(1.0, x[a]);
            let mut t = Vec::with_capacity(self.n + 1);
            let mut cur = Complex64::from_polar(1.0, -(half as f64) * x[a]);
            for _ in 0..=self.n {
                t.push(cur);
                cur *= base;
            }
            tables[a] = t;
        }
        let mut out = [0.0; 3];
        for (idx, c) in &self.modes {
            let mut e = tables[0][idx[0]];
            for a in 1..self.d {
                e *= tables[a][idx[a]];
            }
            for a in 0..self.d {
                out[a] += (c[a] * e).re;
            }
        }
        out
    }
}

struct Interpolant<'a> {
    times: &'a [f64],
    modes: Vec<ModeSet>,
}

impl Interpolant<'_> {
    fn velocity(&self, x: &[f64; 3], t: f64) -> [f64; 3] {
        if self.times.len() == 1 {
            return self.modes[0].eval(x);
        }
        let i = match self.times.partition_point(|&s| s <= t) {
            0 => 0,
            i => (i - 1).min(self.times.len() - 2),
        };
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let w = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
        let a = self.modes[i].eval(x);
        if w == 0.0 {
            return a;
        }
        let b = self.modes[i + 1].eval(x);
        [
            (1.0 - w) * a[0] + w * b[0],
            (1.0 - w) * a[1] + w * b[1],
            (1.0 - w) * a[2] + w * b[2],
        ]
    }

    fn rk4(&self, x: [f64; 3], t: f64, h: f64) -> [f64; 3] {
        let step = |x: &[f64; 3], k: &[f64; 3], c: f64| [x[0] + c * k[0], x[1] + c * k[1], x[2] + c * k[2]];
        let k1 = self.velocity(&x, t);
        let k2 = self.velocity(&step(&x, &k1, 0.5 * h), t + 0.5 * h);
        let k3 = self.velocity(&step(&x, &k2, 0.5 * h), t + 0.5 * h);
        let k4 = self.velocity(&step(&x, &k3, h), t + h);
        let mut out = x;
        for a in 0..3 {
            out[a] += h / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]);
        }
        out
    }
}

fn check_times(traj: &Trajectory, times: &[f64]) -> Result<()> {
    let (lo, hi) = match (traj.times.first(), traj.times.last()) {
        (Some(&lo), Some(&hi)) => (lo, hi),
        _ => return arg("empty trajectory"),
    };
    for &t in times {
        if !(t >= lo && t <= hi + 1e-12 * hi.abs().max(1.0)) {
            return arg(format!("time {t} lies outside the trajectory range [{lo}, {hi}]"));
        }
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return arg("requested times must be nondecreasing");
    }
    Ok(())
}

/// Carry every point from `traj.times[0]` through each requested time.
/// Particle steps never straddle a stored time.
fn advect(traj: &Trajectory, points: &[[f64; 3]], times: &[f64], max_dt: f64) -> Vec<Vec<[f64; 3]>> {
    let interp = Interpolant { times: &traj.times, modes: traj.states.iter().map(ModeSet::new).collect() };
    let mut nodes: Vec<f64> = traj.times.iter().chain(times).cloned().collect();
    nodes.sort_by(f64::total_cmp);
    nodes.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs().max(1.0));
    let t_start = traj.times[0];
    let mut cur = points.to_vec();
    let mut t = t_start;
    let mut out = Vec::with_capacity(times.len());
    let mut next = 0;
    while next < times.len() && times[next] <= t_start {
        out.push(cur.clone());
        next += 1;
    }
    for &node in nodes.iter().filter(|&&s| s > t_start) {
        if next >= times.len() {
            break;
        }
        let span = node - t;
        let sub = (span / max_dt).ceil().max(1.0) as usize;
        let h = span / sub as f64;
        cur = cur
            .par_iter()
            .map(|&x| {
                let mut x = x;
                for s in 0..sub {
                    x = interp.rk4(x, t + s as f64 * h, h);
                }
                x
            })
            .collect();
        t = node;
        while next < times.len() && (times[next] - t).abs() <= 1e-14 * t.abs().max(1.0) {
            out.push(cur.clone());
            next += 1;
        }
    }
    out
}

fn seed_points(g: &Grid, stride: usize) -> Vec<[f64; 3]> {
    (0..g.len())
        .filter_map(|flat| {
            let mut idx = [0usize; 3];
            g.unravel(flat, &mut idx[..g.dim()]);
            idx[..g.dim()].iter().all(|i| i % stride == 0).then(|| g.position(flat))
        })
        .collect()
}

/// Positions of arbitrary particles at each of `times`.
pub fn track_particles(traj: &Trajectory, points: &[[f64; 3]], times: &[f64], max_dt: f64) -> Result<Vec<Vec<[f64; 3]>>> {
    check_times(traj, times)?;
    if !(max_dt > 0.0) {
        return arg("max_dt must be positive");
    }
    Ok(advect(traj, points, times, max_dt))
}

/// Particle map sampled at grid seeds for each of `times`.
pub fn flow_map(traj: &Trajectory, times: &[f64], opts: &FlowMapOptions) -> Result<FlowMap> {
    check_times(traj, times)?;
    if opts.seed_stride == 0 || !(opts.max_dt > 0.0) {
        return arg("seed_stride and max_dt must be positive");
    }
    let seeds = seed_points(&traj.states[0].grid(), opts.seed_stride);
    let positions = advect(traj, &seeds, times, opts.max_dt);
    Ok(FlowMap { times: times.to_vec(), seeds, positions })
}

/// `det ∂X(α,t)/∂α` at every seed by central differences with offset
/// `opts.fd_delta`.
pub fn flow_jacobian(traj: &Trajectory, t: f64, opts: &FlowMapOptions) -> Result<Vec<f64>> {
    check_times(traj, &[t])?;
    if !(opts.fd_delta > 0.0) || opts.seed_stride == 0 {
        return arg("fd_delta and seed_stride must be positive");
    }
    let g = traj.states[0].grid();
    let d = g.dim();
    let seeds = seed_points(&g, opts.seed_stride);
    let mut probes = Vec::with_capacity(seeds.len() * 2 * d);
    for s in &seeds {
        for a in 0..d {
            for sign in [1.0, -1.0] {
                let mut p = *s;
                p[a] += sign * opts.fd_delta;
                probes.push(p);
            }
        }
    }
    let moved = advect(traj, &probes, &[t], opts.max_dt).pop().expect("one time");
    let h = 2.0 * opts.fd_delta;
    Ok((0..seeds.len())
        .map(|i| {
            let base = i * 2 * d;
            let mut jac = [[0.0; 3]; 3];
            for a in 0..d {
                let (p, m) = (moved[base + 2 * a], moved[base + 2 * a + 1]);
                for b in 0..d {
                    jac[b][a] = (p[b] - m[b]) / h;
                }
            }
            if d == 2 {
                jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0]
            } else {
                jac[0][0] * (jac[1][1] * jac[2][2] - jac[1][2] * jac[2][1])
                    - jac[0][1] * (jac[1][0] * jac[2][2] - jac[1][2] * jac[2][0])
                    + jac[0][2] * (jac[1][0] * jac[2][1] - jac[1][1] * jac[2][0])
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::euler::{solve, taylor_green, SolverConfig};
    use crate::field::calculus::derivative;
    use crate::field::{GridField, Repr};
    use std::f64::consts::PI;

    fn steady(u: VectorField, t_final: f64) -> Trajectory {
        Trajectory {
            times: vec![0.0, t_final],
            states: vec![u.clone(), u],
            diagnostics: Vec::new(),
            norm_specs: Vec::new(),
        }
    }

    #[test]
    fn zero_velocity_is_identity() {
        let g = Grid::new(2, 16).unwrap();
        let traj = steady(VectorField::zeros(g, Repr::Physical), 1.0);
        let fm = flow_map(&traj, &[0.5, 1.0], &FlowMapOptions::default()).unwrap();
        for t in 0..2 {
            assert!(fm.displacement(t).iter().all(|x| x.iter().all(|&v| v == 0.0)));
        }
        assert!(flow_map(&traj, &[1.5], &FlowMapOptions::default()).is_err());
    }

    #[test]
    fn interpolant_matches_pointwise_formula() {
        let g = Grid::new(2, 16).unwrap();
        let u = taylor_green(g).unwrap();
        let ms = ModeSet::new(&u);
        for x in [[0.3, 1.7, 0.0], [5.9, 2.2, 0.0], [-1.0, 8.0, 0.0]] {
            let v = ms.eval(&x);
            assert!((v[0] - x[0].sin() * x[1].cos()).abs() < 1e-13);
            assert!((v[1] + x[0].cos() * x[1].sin()).abs() < 1e-13);
        }
    }

    #[test]
    fn vortex_orbits_are_circles() {
        // radially symmetric vortex centred at (π,π): steady, with circular
        // particle paths
        let g = Grid::new(2, 64).unwrap();
        let sigma: f64 = 0.5;
        let psi = GridField::from_fn(g, |x| {
            let r2 = (x[0] - PI).powi(2) + (x[1] - PI).powi(2);
            (-r2 / (2.0 * sigma * sigma)).exp()
        });
        let u = VectorField::new_div_free(vec![derivative(&psi, 1).unwrap(), derivative(&psi, 0).unwrap().scale(-1.0)])
            .unwrap()
            .to_physical();
        let omega = (-0.5f64 * 0.25 / (sigma * sigma)).exp() / (sigma * sigma);
        let period = 2.0 * PI / omega;
        let traj = steady(u, period);
        let radius = |p: &[f64; 3]| ((p[0] - PI).powi(2) + (p[1] - PI).powi(2)).sqrt();
        let seeds: Vec<[f64; 3]> = (0..g.len()).map(|f| g.position(f)).filter(|a| radius(a) <= 1.5).collect();
        let moved = track_particles(&traj, &seeds, &[period], 1e-2).unwrap().pop().unwrap();
        let mut checked = 0;
        for (a, x) in seeds.iter().zip(&moved) {
            assert!((radius(x) - radius(a)).abs() <= 1e-6, "drift at {a:?}");
            // angular speed ω(r) = exp(−r²/2σ²)/σ², so each orbit is a known
            // rotation about the centre
            let r = radius(a);
            let angle = (-r * r / (2.0 * sigma * sigma)).exp() / (sigma * sigma) * period;
            let (c, s) = (angle.cos(), angle.sin());
            let (dx, dy) = (a[0] - PI, a[1] - PI);
            let ex = [PI + c * dx - s * dy, PI + s * dx + c * dy];
            assert!((x[0] - ex[0]).abs() + (x[1] - ex[1]).abs() <= 1e-5, "orbit at {a:?}");
            checked += 1;
        }
        assert!(checked > 100);
    }

    #[test]
    fn jacobian_is_one_on_unsteady_flow() {
        let g = Grid::new(2, 32).unwrap();
        let u0 = taylor_green(g).unwrap().add(
            &crate::field::random::random_vector(g, &crate::field::random::SpectrumSpec::new(3.0, 1.0, 4.0, 9))
                .unwrap()
                .scale(0.3),
        );
        let u0 = crate::euler::leray_project(&u0).to_physical();
        let traj = solve(&u0, &SolverConfig::new(1e-2, 0.5).with_record_every(5), None, &[]).unwrap();
        let opts = FlowMapOptions { seed_stride: 4, ..Default::default() };
        let det = flow_jacobian(&traj, 0.5, &opts).unwrap();
        let worst = det.iter().map(|j| (j - 1.0).abs()).fold(0.0, f64::max);
        assert!(worst <= 1e-4, "worst {worst}");
    }
}

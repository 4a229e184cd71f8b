//! Pseudo-spectral incompressible Euler solver on the torus.
//!
//! The state is advanced in spectral space by classical RK4 on
//! `∂_t u = −ℙ(u·∇u)` with 2/3-rule dealiasing of the quadratic term. The
//! state is re-projected after every full step, and the Courant number
//! `‖u‖_∞ dt/Δx` is checked before every step.

pub mod flow_map;

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::field::calculus::{derivative_unchecked, inside_dealias_box};
use crate::field::io::{write_field, FieldData};
use crate::field::{GridField, Repr, VectorField};
use crate::lp_bank::LPFilterBank;
use crate::norms::{lp_norm_components, BlockMagnitudes, NormSpec};

pub use crate::field::calculus::leray_project;
pub use flow_map::{flow_jacobian, flow_map, track_particles, FlowMap, FlowMapOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub dt: f64,
    #[serde(rename = "T")]
    pub t_final: f64,
    #[serde(default = "default_true")]
    pub dealias: bool,
    #[serde(default = "default_cfl")]
    pub cfl_guard: f64,
    /// Record a state every this many steps (the final state is always
    /// recorded).
    #[serde(default = "default_record_every")]
    pub record_every: usize,
}

fn default_true() -> bool {
    true
}
fn default_cfl() -> f64 {
    0.5
}
fn default_record_every() -> usize {
    100
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { dt: 1e-3, t_final: 1.0, dealias: true, cfl_guard: 0.5, record_every: 100 }
    }
}

impl SolverConfig {
    pub fn new(dt: f64, t_final: f64) -> Self {
        Self { dt, t_final, ..Self::default() }
    }

    pub fn with_record_every(self, record_every: usize) -> Self {
        Self { record_every, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return arg("dt must be positive");
        }
        if !(self.t_final >= 0.0) || !self.t_final.is_finite() {
            return arg("T must be nonnegative");
        }
        if !(self.cfl_guard > 0.0 && self.cfl_guard <= 0.5) {
            return arg("cfl_guard must lie in (0, 0.5]");
        }
        if self.record_every == 0 {
            return arg("record_every must be at least 1");
        }
        self.steps().map(|_| ())
    }

    /// Number of fixed steps reaching `T` exactly.
    pub fn steps(&self) -> Result<usize> {
        let steps = (self.t_final / self.dt).round();
        if (steps * self.dt - self.t_final).abs() > 1e-9 * self.t_final.max(self.dt) {
            return arg(format!("T = {} is not an integer multiple of dt = {}", self.t_final, self.dt));
        }
        Ok(steps as usize)
    }
}

fn zero_outside_box(f: &mut GridField) {
    let g = f.grid();
    let vals: Vec<Complex64> = f
        .values()
        .iter()
        .enumerate()
        .map(|(flat, &v)| if inside_dealias_box(&g, &g.wavevector(flat)) { v } else { Complex64::new(0.0, 0.0) })
        .collect();
    *f = GridField::from_values(g, vals, Repr::Spectral, f.is_real()).expect("grid length");
}

/// `(a·∇)b` in spectral representation, truncated to the 2/3 box when
/// `dealias` is set (factors are truncated too).
pub fn advection(a: &VectorField, b: &VectorField, dealias: bool) -> VectorField {
    let g = a.grid();
    let d = g.dim();
    let prep = |f: &GridField| {
        let mut s = f.to_spectral();
        if dealias {
            zero_outside_box(&mut s);
        }
        s
    };
    let a_phys: Vec<GridField> = a.components().iter().map(|c| prep(c).into_physical()).collect();
    let b_spec: Vec<GridField> = b.components().iter().map(prep).collect();
    let mut out = Vec::with_capacity(d);
    for bi in &b_spec {
        let mut acc = vec![Complex64::new(0.0, 0.0); g.len()];
        for (l, al) in a_phys.iter().enumerate() {
            let db = derivative_unchecked(bi, l).into_physical();
            for ((t, x), y) in acc.iter_mut().zip(al.values()).zip(db.values()) {
                *t += x * y;
            }
        }
        let is_real = a.components().iter().chain(b.components()).all(|c| c.is_real());
        let mut s = GridField::from_values(g, acc, Repr::Physical, is_real)
            .expect("grid length")
            .into_spectral();
        if dealias {
            zero_outside_box(&mut s);
        }
        out.push(s);
    }
    VectorField::new(out).expect("d components")
}

/// `−k(k·N̂)/|k|²` for `N = u·∇u`: the gradient `∇(−Δ)^{−1}div(u·∇u)`,
/// pressure mean set to zero.
pub fn pressure_gradient(u: &VectorField) -> Result<VectorField> {
    u.require_div_free("pressure velocity")?;
    Ok(pressure_gradient_of(&advection(u, u, true)).to_physical())
}

fn pressure_gradient_of(nl: &VectorField) -> VectorField {
    let g = nl.grid();
    let d = g.dim();
    let specs: Vec<GridField> = nl.components().iter().map(|c| c.to_spectral()).collect();
    let mut out: Vec<Vec<Complex64>> = vec![vec![Complex64::new(0.0, 0.0); g.len()]; d];
    for flat in 0..g.len() {
        let k = g.wavevector(flat);
        let mag2: i64 = k[..d].iter().map(|c| c * c).sum();
        if mag2 == 0 || g.touches_nyquist(&k) {
            continue;
        }
        let mut kn = Complex64::new(0.0, 0.0);
        for a in 0..d {
            kn += specs[a].values()[flat] * k[a] as f64;
        }
        let coef = kn / mag2 as f64;
        for a in 0..d {
            out[a][flat] = -coef * k[a] as f64;
        }
    }
    let is_real = nl.components().iter().all(|c| c.is_real());
    VectorField::new(
        out.into_iter()
            .map(|v| GridField::from_values(g, v, Repr::Spectral, is_real).expect("grid length"))
            .collect(),
    )
    .expect("d components")
}

/// `−ℙ(u·∇u)` (spectral representation, flagged divergence-free).
pub fn euler_rhs(u: &VectorField) -> Result<VectorField> {
    u.require_div_free("Euler velocity")?;
    Ok(rhs_unchecked(u, true))
}

pub(crate) fn rhs_unchecked(u: &VectorField, dealias: bool) -> VectorField {
    leray_project(&advection(u, u, dealias)).scale(-1.0)
}

/// `−(u·∇u) − ∇p`, the pressure form of the right-hand side.
pub fn euler_rhs_pressure_form(u: &VectorField) -> Result<VectorField> {
    u.require_div_free("Euler velocity")?;
    let nl = advection(u, u, true);
    let gp = pressure_gradient_of(&nl);
    Ok(nl.add(&gp).scale(-1.0))
}

/// One classical RK4 step for an autonomous right-hand side, followed by a
/// Leray projection.
pub(crate) fn rk4_step(u: &VectorField, dt: f64, rhs: impl Fn(&VectorField) -> VectorField) -> VectorField {
    let k1 = rhs(u);
    let k2 = rhs(&u.axpy(0.5 * dt, &k1));
    let k3 = rhs(&u.axpy(0.5 * dt, &k2));
    let k4 = rhs(&u.axpy(dt, &k3));
    let incr = k1.add(&k2.scale(2.0)).add(&k3.scale(2.0)).add(&k4);
    leray_project(&u.axpy(dt / 6.0, &incr))
}

/// Courant number `‖u‖_∞ dt / Δx`.
pub fn courant(u: &VectorField, dt: f64) -> f64 {
    u.max_magnitude() * dt / u.grid().spacing()
}

/// Per-record diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub time: f64,
    /// `½‖u‖²_{L²}`.
    pub energy: f64,
    /// `‖ω‖²_{L²}` with `ω` the vorticity (its Euclidean magnitude in 3D).
    pub enstrophy: f64,
    pub max_speed: f64,
    pub divergence: f64,
    /// Requested norms, in the order they were requested.
    pub norms: Vec<f64>,
}

pub fn vorticity(u: &VectorField) -> Vec<GridField> {
    let d = u.dim();
    let du = |i: usize, j: usize| derivative_unchecked(u.component(i), j);
    if d == 2 {
        vec![du(1, 0).sub(&du(0, 1))]
    } else {
        vec![du(2, 1).sub(&du(1, 2)), du(0, 2).sub(&du(2, 0)), du(1, 0).sub(&du(0, 1))]
    }
}

pub fn diagnostics(bank: Option<&LPFilterBank>, u: &VectorField, time: f64, record: &[NormSpec]) -> Result<Diagnostics> {
    let l2 = lp_norm_components(u.components(), 2.0)?;
    let w = lp_norm_components(&vorticity(u), 2.0)?;
    let norms = if record.is_empty() {
        Vec::new()
    } else {
        let bank = bank.ok_or_else(|| Error::Argument("recording norms needs a filter bank".into()))?;
        let mags = BlockMagnitudes::new(bank, u.components())?;
        record.iter().map(|s| mags.norm(s)).collect::<Result<Vec<f64>>>()?
    };
    Ok(Diagnostics {
        time,
        energy: 0.5 * l2 * l2,
        enstrophy: w * w,
        max_speed: u.max_magnitude(),
        divergence: u.divergence_ratio(),
        norms,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<VectorField>,
    pub diagnostics: Vec<Diagnostics>,
    pub norm_specs: Vec<NormSpec>,
}

impl Trajectory {
    pub fn final_state(&self) -> &VectorField {
        self.states.last().expect("nonempty trajectory")
    }

    /// `sup_t` of the `i`-th recorded norm.
    pub fn sup_norm(&self, i: usize) -> f64 {
        self.diagnostics.iter().map(|d| d.norms[i]).fold(0.0, f64::max)
    }

    /// Write `fields/state_XXXXX.lpf` for every state plus `manifest.json`
    /// `{times[], files[], diagnostics[]}` under `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir.join("fields"))?;
        let mut files = Vec::new();
        for (i, s) in self.states.iter().enumerate() {
            let name = format!("fields/state_{i:05}.lpf");
            write_field(dir.join(&name), &FieldData::Vector(s.to_physical()))?;
            files.push(name);
        }
        let manifest = TrajectoryManifest {
            times: self.times.clone(),
            files,
            diagnostics: self.diagnostics.clone(),
            norm_specs: self.norm_specs.clone(),
        };
        fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryManifest {
    pub times: Vec<f64>,
    pub files: Vec<String>,
    pub diagnostics: Vec<Diagnostics>,
    #[serde(default)]
    pub norm_specs: Vec<NormSpec>,
}

/// Integrate from `u0` to `T`, recording states and diagnostics (including
/// the norms in `record`, which then need `bank`).
pub fn solve(u0: &VectorField, cfg: &SolverConfig, bank: Option<&LPFilterBank>, record: &[NormSpec]) -> Result<Trajectory> {
    cfg.validate()?;
    u0.require_div_free("initial velocity")?;
    let steps = cfg.steps()?;
    let mut u = u0.to_spectral();
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![u0.to_physical().with_div_free(true)],
        diagnostics: vec![diagnostics(bank, u0, 0.0, record)?],
        norm_specs: record.to_vec(),
    };
    for step in 0..steps {
        let t = step as f64 * cfg.dt;
        let c = courant(&u, cfg.dt);
        if c > cfg.cfl_guard {
            return Err(Error::Stability { time: t, courant: c, member: None });
        }
        u = rk4_step(&u, cfg.dt, |v| rhs_unchecked(v, cfg.dealias));
        let done = step + 1;
        if done % cfg.record_every == 0 || done == steps {
            let t_now = done as f64 * cfg.dt;
            let phys = u.to_physical();
            traj.diagnostics.push(diagnostics(bank, &phys, t_now, record)?);
            traj.times.push(t_now);
            traj.states.push(phys);
        }
    }
    Ok(traj)
}

/// 2D Taylor-Green vortex `(sin x cos y, −cos x sin y)`.
pub fn taylor_green(grid: crate::field::Grid) -> Result<VectorField> {
    if grid.dim() != 2 {
        return arg("the Taylor-Green vortex is two-dimensional");
    }
    VectorField::new_div_free(vec![
        GridField::from_fn(grid, |x| x[0].sin() * x[1].cos()),
        GridField::from_fn(grid, |x| -x[0].cos() * x[1].sin()),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::random::{random_vector, SpectrumSpec};
    use crate::field::Grid;

    fn g64() -> Grid {
        Grid::new(2, 64).unwrap()
    }

    fn sup(u: &VectorField) -> f64 {
        u.max_magnitude()
    }

    fn rel_l2(a: &VectorField, b: &VectorField) -> f64 {
        lp_norm_components(a.sub(b).components(), 2.0).unwrap() / lp_norm_components(b.components(), 2.0).unwrap()
    }

    #[test]
    fn taylor_green_balance() {
        let u = taylor_green(g64()).unwrap();
        // termwise oracle: u·∇u = (½ sin 2x, ½ sin 2y)
        let direct = VectorField::new(vec![
            GridField::from_fn(g64(), |x| 0.5 * (2.0 * x[0]).sin()),
            GridField::from_fn(g64(), |x| 0.5 * (2.0 * x[1]).sin()),
        ])
        .unwrap();
        let gp = pressure_gradient(&u).unwrap();
        assert!(sup(&gp.add(&direct)) <= 1e-10);
        assert!(sup(&advection(&u, &u, true).to_physical().sub(&direct)) <= 1e-12);
        assert!(sup(&euler_rhs(&u).unwrap()) <= 1e-10);
    }

    #[test]
    fn shear_has_no_pressure() {
        let g = g64();
        let u = VectorField::new_div_free(vec![GridField::from_fn(g, |x| x[1].sin()), GridField::constant(g, 0.0)]).unwrap();
        assert!(sup(&pressure_gradient(&u).unwrap()) <= 1e-13);
        assert!(sup(&euler_rhs(&u).unwrap()) <= 1e-13);
    }

    #[test]
    fn quadratic_scaling_and_forms() {
        let g = g64();
        let u = random_vector(g, &SpectrumSpec::new(2.0, 1.0, 10.0, 3)).unwrap();
        let p1 = pressure_gradient(&u).unwrap();
        let p3 = pressure_gradient(&u.scale(3.0)).unwrap();
        assert!(sup(&p3.sub(&p1.scale(9.0))) <= 1e-11 * sup(&p3));
        let a = euler_rhs(&u).unwrap().to_physical();
        let b = euler_rhs_pressure_form(&u).unwrap().to_physical();
        assert!(sup(&a.sub(&b)) <= 1e-11 * sup(&a).max(1.0));
        let rhs_direct = advection(&u, &u, true).add(&pressure_gradient(&u).unwrap()).scale(-1.0).to_physical();
        assert!(sup(&a.sub(&rhs_direct)) <= 1e-11 * sup(&a).max(1.0));
        assert!(a.divergence_ratio() <= 1e-12);
        assert!(sup(&euler_rhs(&VectorField::zeros(g, Repr::Physical)).unwrap()) == 0.0);
    }

    #[test]
    fn leray_projector_properties() {
        let g = g64();
        let comps = vec![
            crate::field::random::random_scalar(g, &SpectrumSpec::new(1.0, 1.0, 20.0, 1)).unwrap(),
            crate::field::random::random_scalar(g, &SpectrumSpec::new(1.0, 1.0, 20.0, 2)).unwrap(),
        ];
        let v = VectorField::new(comps).unwrap();
        let p = leray_project(&v);
        let pp = leray_project(&p);
        assert!(sup(&pp.sub(&p)) <= 1e-13 * sup(&p));
        assert!(p.divergence_ratio() <= 1e-12);
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::new(0.0, 1.0).validate().is_err());
        assert!(SolverConfig::new(0.3, 1.0).validate().is_err());
        assert!(SolverConfig { cfl_guard: 0.8, ..SolverConfig::default() }.validate().is_err());
        assert_eq!(SolverConfig::new(1e-3, 1.0).steps().unwrap(), 1000);
        let text = serde_json::to_string(&SolverConfig::default()).unwrap();
        assert!(text.contains("\"T\""));
    }

    #[test]
    fn cfl_violation_reports_time() {
        let g = Grid::new(2, 16).unwrap();
        let u = taylor_green(g).unwrap().scale(50.0);
        let err = solve(&u, &SolverConfig::new(0.01, 0.1), None, &[]).unwrap_err();
        match err {
            Error::Stability { time, courant, member } => {
                assert_eq!(time, 0.0);
                assert!(courant > 0.5);
                assert!(member.is_none());
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn short_run_conserves_and_records() {
        let g = Grid::new(2, 32).unwrap();
        let u0 = random_vector(g, &SpectrumSpec::new(2.0, 1.0, 6.0, 5)).unwrap();
        let cfg = SolverConfig::new(1e-2, 0.2).with_record_every(5);
        let traj = solve(&u0, &cfg, None, &[]).unwrap();
        assert_eq!(traj.times.len(), 5);
        assert!(traj.times.windows(2).all(|w| w[0] < w[1]));
        let e0 = traj.diagnostics[0].energy;
        for dgn in &traj.diagnostics {
            assert!((dgn.energy - e0).abs() <= 1e-8 * e0);
            assert!(dgn.divergence <= 1e-9);
        }
        assert!(rel_l2(traj.final_state(), &u0) > 0.0);
    }
}

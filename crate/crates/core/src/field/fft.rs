//! Multi-dimensional complex FFTs over row-major cubes, built from cached
//! one-dimensional `rustfft` plans.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

type PlanPair = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

fn plans(n: usize) -> PlanPair {
    static CACHE: OnceLock<Mutex<HashMap<usize, PlanPair>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
        })
        .clone()
}

/// Unnormalized in-place transform of an `n^d` row-major cube.
///
/// `Forward` computes `sum_x f(x) e^{-2πi k·x/n}`, `Inverse` the same with
/// `+i`. No scaling is applied in either direction.
pub fn transform(buf: &mut [Complex64], n: usize, d: usize, dir: Direction) {
    debug_assert_eq!(buf.len(), n.pow(d as u32));
    let (fwd, inv) = plans(n);
    let plan = match dir {
        Direction::Forward => fwd,
        Direction::Inverse => inv,
    };
    let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];

    // last axis: contiguous rows
    plan.process_with_scratch(buf, &mut scratch);

    if d == 1 {
        return;
    }
    let total = buf.len();
    let mut lines = vec![Complex64::new(0.0, 0.0); total];
    for axis in 0..d - 1 {
        let stride = n.pow((d - 1 - axis) as u32);
        let block = stride * n;
        // gather every line along `axis` into contiguous storage
        let mut line = 0;
        for outer in (0..total).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                let dst = &mut lines[line * n..(line + 1) * n];
                for (t, slot) in dst.iter_mut().enumerate() {
                    *slot = buf[base + t * stride];
                }
                line += 1;
            }
        }
        plan.process_with_scratch(&mut lines, &mut scratch);
        let mut line = 0;
        for outer in (0..total).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                let src = &lines[line * n..(line + 1) * n];
                for (t, v) in src.iter().enumerate() {
                    buf[base + t * stride] = *v;
                }
                line += 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn naive_dft_2d(x: &[Complex64], n: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        for k0 in 0..n {
            for k1 in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for i0 in 0..n {
                    for i1 in 0..n {
                        let ph = -2.0 * PI * ((k0 * i0 + k1 * i1) as f64) / n as f64;
                        acc += x[i0 * n + i1] * Complex64::from_polar(1.0, ph);
                    }
                }
                out[k0 * n + k1] = acc;
            }
        }
        out
    }

    #[test]
    fn matches_naive_dft() {
        let n = 8;
        let x: Vec<Complex64> = (0..n * n)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 1.1).cos()))
            .collect();
        let mut y = x.clone();
        transform(&mut y, n, 2, Direction::Forward);
        let z = naive_dft_2d(&x, n);
        for (a, b) in y.iter().zip(&z) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn inverse_undoes_forward_3d() {
        let n = 8;
        let x: Vec<Complex64> = (0..n * n * n)
            .map(|i| Complex64::new((i as f64 * 0.13).sin(), 0.0))
            .collect();
        let mut y = x.clone();
        transform(&mut y, n, 3, Direction::Forward);
        transform(&mut y, n, 3, Direction::Inverse);
        let scale = 1.0 / (n * n * n) as f64;
        for (a, b) in y.iter().zip(&x) {
            assert!((a * scale - b).norm() < 1e-13);
        }
    }
}

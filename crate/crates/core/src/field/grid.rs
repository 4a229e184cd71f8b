use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{arg, Result};

/// Uniform periodic grid on the torus `[0, 2π)^d`.
///
/// Samples are stored row-major with the last axis varying fastest. The
/// spectral lattice uses the index-to-frequency map `i -> i` for `i <= n/2`
/// and `i -> i - n` otherwise, so frequencies live in `{-n/2+1, ..., n/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Grid {
    d: usize,
    n: usize,
}

impl Grid {
    pub fn new(d: usize, n: usize) -> Result<Self> {
        if !(d == 2 || d == 3) {
            return arg(format!("dimension must be 2 or 3, got {d}"));
        }
        if n < 8 || !n.is_power_of_two() {
            return arg(format!("samples per axis must be a power of two >= 8, got {n}"));
        }
        Ok(Self { d, n })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Period per axis.
    #[inline]
    pub fn length(&self) -> f64 {
        2.0 * PI
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid spacing `2π/n`.
    #[inline]
    pub fn spacing(&self) -> f64 {
        self.length() / self.n as f64
    }

    /// Riemann quadrature weight `(2π/n)^d`.
    #[inline]
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.d as i32)
    }

    /// Total volume `(2π)^d`.
    #[inline]
    pub fn volume(&self) -> f64 {
        self.length().powi(self.d as i32)
    }

    #[inline]
    pub fn nyquist(&self) -> i64 {
        (self.n / 2) as i64
    }

    /// Signed frequency for a single-axis index.
    #[inline]
    pub fn freq(&self, i: usize) -> i64 {
        if i <= self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Single-axis index for a signed frequency (taken modulo `n`).
    #[inline]
    pub fn index_of_freq(&self, k: i64) -> usize {
        k.rem_euclid(self.n as i64) as usize
    }

    /// Multi-index of a flat offset, written into `out[..d]`.
    #[inline]
    pub fn unravel(&self, mut flat: usize, out: &mut [usize]) {
        for a in (0..self.d).rev() {
            out[a] = flat % self.n;
            flat /= self.n;
        }
    }

    #[inline]
    pub fn ravel(&self, idx: &[usize]) -> usize {
        idx[..self.d].iter().fold(0, |acc, &i| acc * self.n + i)
    }

    /// Frequency vector of a flat spectral offset.
    #[inline]
    pub fn wavevector(&self, flat: usize) -> [i64; 3] {
        let mut idx = [0usize; 3];
        self.unravel(flat, &mut idx);
        let mut k = [0i64; 3];
        for a in 0..self.d {
            k[a] = self.freq(idx[a]);
        }
        k
    }

    /// Flat offset of the spectral coefficient for frequency `k`.
    #[inline]
    pub fn offset_of_wavevector(&self, k: &[i64]) -> usize {
        let mut idx = [0usize; 3];
        for a in 0..self.d {
            idx[a] = self.index_of_freq(k[a]);
        }
        self.ravel(&idx)
    }

    /// Physical coordinate of a flat sample offset.
    #[inline]
    pub fn position(&self, flat: usize) -> [f64; 3] {
        let mut idx = [0usize; 3];
        self.unravel(flat, &mut idx);
        let h = self.spacing();
        let mut x = [0.0; 3];
        for a in 0..self.d {
            x[a] = idx[a] as f64 * h;
        }
        x
    }

    /// Euclidean magnitude of every lattice frequency, in flat order.
    pub fn wavenumber_magnitudes(&self) -> Vec<f64> {
        (0..self.len())
            .map(|flat| {
                let k = self.wavevector(flat);
                (k[..self.d].iter().map(|&c| (c * c) as f64).sum::<f64>()).sqrt()
            })
            .collect()
    }

    /// True if any component of `k` sits on the unpaired Nyquist frequency.
    #[inline]
    pub fn touches_nyquist(&self, k: &[i64; 3]) -> bool {
        k[..self.d].iter().any(|&c| c == self.nyquist())
    }

    /// Largest per-axis frequency kept by the 2/3 dealiasing rule.
    #[inline]
    pub fn dealias_cutoff(&self) -> i64 {
        // keep |k_i| < n/3
        ((self.n as i64) - 1) / 3
    }
}

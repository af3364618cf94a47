//! Periodic Fourier differentiation on the unit interval.
//!
//! Samples are taken at `z_j = j / n`. Wavenumbers follow the usual signed
//! ordering; for even `n` the Nyquist bin carries `-pi n`. Complex data keeps
//! that bin in first derivatives so that `sum |d_z u|^2 = -sum conj(u) d_zz u`
//! holds exactly; real sequences drop it in odd derivatives to stay real.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

#[derive(Clone)]
pub struct PeriodicSpectrum {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    wavenumbers: Vec<f64>,
}

impl fmt::Debug for PeriodicSpectrum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PeriodicSpectrum").field("n", &self.n).finish()
    }
}

impl PeriodicSpectrum {
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "periodic spectrum needs at least one sample");
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let wavenumbers = (0..n)
            .map(|j| {
                let freq = if 2 * j < n { j as f64 } else { j as f64 - n as f64 };
                2.0 * PI * freq
            })
            .collect();
        Self {
            n,
            forward,
            inverse,
            wavenumbers,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Angular wavenumber `2 pi m` of each bin.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    pub fn is_nyquist(&self, j: usize) -> bool {
        self.n % 2 == 0 && 2 * j == self.n
    }

    /// Unnormalized forward transform of every length-`n` chunk of `buf`.
    pub fn forward(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len() % self.n, 0);
        if self.n > 1 {
            self.forward.process(buf);
        }
    }

    /// Inverse transform of every chunk, normalized by `1/n`.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len() % self.n, 0);
        if self.n > 1 {
            self.inverse.process(buf);
        }
        let scale = 1.0 / self.n as f64;
        for v in buf.iter_mut() {
            *v *= scale;
        }
    }

    /// Multiplier `(i k)^order` for bin `j` of complex data.
    pub fn multiplier(&self, j: usize, order: u32) -> Complex64 {
        Complex64::new(0.0, self.wavenumbers[j]).powu(order)
    }

    /// In-place `d^order/dz^order` of every chunk of complex samples.
    pub fn differentiate_columns(&self, buf: &mut [Complex64], order: u32) {
        if order == 0 {
            return;
        }
        if self.n == 1 {
            buf.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
            return;
        }
        self.forward(buf);
        let mult: Vec<Complex64> = (0..self.n).map(|j| self.multiplier(j, order)).collect();
        for chunk in buf.chunks_exact_mut(self.n) {
            for (v, m) in chunk.iter_mut().zip(&mult) {
                *v *= m;
            }
        }
        self.inverse(buf);
    }

    /// Derivative of a real periodic sequence; the Nyquist bin is dropped for
    /// odd orders.
    pub fn differentiate_real(&self, x: &[f64], order: u32) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        if order == 0 {
            return x.to_vec();
        }
        let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward(&mut buf);
        for (j, v) in buf.iter_mut().enumerate() {
            if order % 2 == 1 && self.is_nyquist(j) {
                *v = Complex64::new(0.0, 0.0);
            } else {
                *v *= self.multiplier(j, order);
            }
        }
        self.inverse(&mut buf);
        buf.iter().map(|c| c.re).collect()
    }

    /// Complex Fourier coefficient of mode `m` (normalized mean of `x e^{-2 pi i m z}`).
    pub fn mode_coefficient(&self, x: &[Complex64], m: i64) -> Complex64 {
        let n = self.n as f64;
        x.iter()
            .enumerate()
            .map(|(j, &v)| v * Complex64::from_polar(1.0, -2.0 * PI * m as f64 * j as f64 / n))
            .sum::<Complex64>()
            / n
    }
}

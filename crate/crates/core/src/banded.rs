//! Banded `L D L^T` factorization for complex symmetric matrices whose real
//! part is positive definite (so no pivoting is needed).

use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Lower band of a symmetric matrix: row `i` stores columns `i - b ..= i`.
#[derive(Clone, Debug)]
pub struct SymmetricBand {
    n: usize,
    b: usize,
    data: Vec<Complex64>,
}

impl SymmetricBand {
    pub fn zeros(n: usize, bandwidth: usize) -> Self {
        Self {
            n,
            b: bandwidth,
            data: vec![ZERO; n * (bandwidth + 1)],
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn bandwidth(&self) -> usize {
        self.b
    }

    fn offset(&self, i: usize, j: usize) -> usize {
        i * (self.b + 1) + (j + self.b - i)
    }

    /// Adds `v` at `(i, j)` (and implicitly `(j, i)`); requires `|i - j| <= b`.
    pub fn add(&mut self, i: usize, j: usize, v: Complex64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        assert!(i - j <= self.b, "entry outside band");
        let k = self.offset(i, j);
        self.data[k] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        if i - j > self.b {
            ZERO
        } else {
            self.data[self.offset(i, j)]
        }
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![ZERO; self.n];
        for i in 0..self.n {
            let lo = i.saturating_sub(self.b);
            for j in lo..i {
                let a = self.data[self.offset(i, j)];
                y[i] += a * x[j];
                y[j] += a * x[i];
            }
            y[i] += self.data[self.offset(i, i)] * x[i];
        }
        y
    }

    /// Factors in place; fails on a vanishing pivot.
    pub fn factor(mut self) -> Result<BandedLdl> {
        let (n, b) = (self.n, self.b);
        let w = b + 1;
        let mut d = vec![ZERO; n];
        let mut u = vec![ZERO; w];
        for i in 0..n {
            let lo = i.saturating_sub(b);
            let row_i = i * w + b - i;
            // u_k = L_ik d_k, built left to right.
            for j in lo..i {
                let row_j = j * w + b - j;
                let klo = lo.max(j.saturating_sub(b));
                let mut s = self.data[row_i + j];
                for k in klo..j {
                    s -= u[k - lo] * self.data[row_j + k];
                }
                u[j - lo] = s;
                self.data[row_i + j] = s / d[j];
            }
            let mut s = self.data[row_i + i];
            for k in lo..i {
                s -= u[k - lo] * self.data[row_i + k];
            }
            if !(s.norm() > 1e-300) || !s.re.is_finite() || !s.im.is_finite() {
                return Err(Error::StepFailed(format!("zero pivot at row {i}")));
            }
            d[i] = s;
            self.data[row_i + i] = Complex64::new(1.0, 0.0);
        }
        Ok(BandedLdl {
            n,
            b,
            l: self.data,
            d,
        })
    }
}

#[derive(Clone, Debug)]
pub struct BandedLdl {
    n: usize,
    b: usize,
    l: Vec<Complex64>,
    d: Vec<Complex64>,
}

impl BandedLdl {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Solves in place. With `conjugate` set, solves with the elementwise
    /// conjugate of the factored matrix.
    pub fn solve_in_place(&self, x: &mut [Complex64], conjugate: bool) {
        let (n, b) = (self.n, self.b);
        let w = b + 1;
        let c = |z: Complex64| if conjugate { z.conj() } else { z };
        for i in 0..n {
            let lo = i.saturating_sub(b);
            let row = i * w + b - i;
            let mut s = x[i];
            for k in lo..i {
                s -= c(self.l[row + k]) * x[k];
            }
            x[i] = s;
        }
        for i in 0..n {
            x[i] /= c(self.d[i]);
        }
        for i in (0..n).rev() {
            let lo = i.saturating_sub(b);
            let row = i * w + b - i;
            let xi = x[i];
            for k in lo..i {
                x[k] -= c(self.l[row + k]) * xi;
            }
        }
    }
}

//! Periodic planar curves `gamma: I -> R^2`, moduli `sigma = (lambda, gamma)`
//! and tangent vectors `(mu, xi)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::PeriodicSpectrum;

pub const MODULI_SCHEMA_VERSION: u32 = 1;

/// One Fourier mode `amplitude * e^{i (2 pi k z + phase)}` of `gamma^1 + i gamma^2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveMode {
    pub amplitude: f64,
    pub wavenumber: i64,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub points: Vec<[f64; 2]>,
}

impl Curve {
    pub fn new(points: Vec<[f64; 2]>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("curve needs at least one sample".into()));
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("curve has non-finite samples".into()));
        }
        Ok(Self { points })
    }

    pub fn zero(n_z: usize) -> Self {
        Self {
            points: vec![[0.0, 0.0]; n_z],
        }
    }

    pub fn constant(n_z: usize, c: [f64; 2]) -> Self {
        Self {
            points: vec![c; n_z],
        }
    }

    pub fn from_modes(n_z: usize, modes: &[CurveMode]) -> Self {
        let points = (0..n_z)
            .map(|j| {
                let z = j as f64 / n_z as f64;
                let w: Complex64 = modes
                    .iter()
                    .map(|m| {
                        Complex64::from_polar(m.amplitude, 2.0 * PI * m.wavenumber as f64 * z + m.phase)
                    })
                    .sum();
                [w.re, w.im]
            })
            .collect();
        Self { points }
    }

    pub fn n_z(&self) -> usize {
        self.points.len()
    }

    pub fn component(&self, c: usize) -> Vec<f64> {
        self.points.iter().map(|p| p[c]).collect()
    }

    fn from_components(a: &[f64], b: &[f64]) -> Self {
        Self {
            points: a.iter().zip(b).map(|(&x, &y)| [x, y]).collect(),
        }
    }

    /// Spectral derivative of the given order.
    pub fn derivative(&self, order: u32) -> Curve {
        let sp = PeriodicSpectrum::new(self.n_z());
        self.derivative_with(&sp, order)
    }

    pub fn derivative_with(&self, sp: &PeriodicSpectrum, order: u32) -> Curve {
        let a = sp.differentiate_real(&self.component(0), order);
        let b = sp.differentiate_real(&self.component(1), order);
        Self::from_components(&a, &b)
    }

    pub fn sup_norm(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p[0].hypot(p[1]))
            .fold(0.0, f64::max)
    }

    /// `sup|gamma| + sup|gamma_z| + sup|gamma_zz|`.
    pub fn c2_norm(&self) -> f64 {
        self.sup_norm() + self.derivative(1).sup_norm() + self.derivative(2).sup_norm()
    }

    /// Fourier coefficient of mode `m` of `gamma^1 + i gamma^2`.
    pub fn mode_coefficient(&self, m: i64) -> Complex64 {
        let sp = PeriodicSpectrum::new(self.n_z());
        let w: Vec<Complex64> = self.points.iter().map(|p| Complex64::new(p[0], p[1])).collect();
        sp.mode_coefficient(&w, m)
    }

    pub fn translated(&self, c: [f64; 2]) -> Curve {
        Self {
            points: self.points.iter().map(|p| [p[0] + c[0], p[1] + c[1]]).collect(),
        }
    }

    pub fn rotated(&self, angle: f64) -> Curve {
        let (s, c) = angle.sin_cos();
        Self {
            points: self
                .points
                .iter()
                .map(|p| [c * p[0] - s * p[1], s * p[0] + c * p[1]])
                .collect(),
        }
    }

    pub fn sup_distance(&self, other: &Curve) -> f64 {
        self.points
            .iter()
            .zip(&other.points)
            .map(|(a, b)| (a[0] - b[0]).hypot(a[1] - b[1]))
            .fold(0.0, f64::max)
    }

    /// Arclength `int_I (1 + |gamma_z|^2)^{1/2} dz` of the graph `(gamma(z), z)`.
    pub fn length(&self) -> f64 {
        let d = self.derivative(1);
        d.points
            .iter()
            .map(|p| (1.0 + p[0] * p[0] + p[1] * p[1]).sqrt())
            .sum::<f64>()
            / self.n_z() as f64
    }

    /// `self + s * xi`.
    pub fn advanced(&self, xi: &[[f64; 2]], s: f64) -> Curve {
        Self {
            points: self
                .points
                .iter()
                .zip(xi)
                .map(|(p, d)| [p[0] + s * d[0], p[1] + s * d[1]])
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Moduli {
    pub lambda: f64,
    pub curve: Curve,
}

impl Moduli {
    pub fn new(lambda: f64, curve: Curve) -> Self {
        Self { lambda, curve }
    }

    pub fn straight(n_z: usize) -> Self {
        Self::new(0.0, Curve::zero(n_z))
    }

    /// `|lambda| + ||gamma||_{C^2}`.
    pub fn y2_norm(&self) -> f64 {
        self.lambda.abs() + self.curve.c2_norm()
    }

    /// `self + s * chi`.
    pub fn advanced(&self, chi: &TangentModuli, s: f64) -> Moduli {
        Self {
            lambda: self.lambda + s * chi.mu,
            curve: self.curve.advanced(&chi.xi, s),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&ModuliRecord {
            version: MODULI_SCHEMA_VERSION,
            lambda: self.lambda,
            points: self.curve.points.clone(),
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let rec: ModuliRecord = serde_json::from_str(text)?;
        if rec.version != MODULI_SCHEMA_VERSION {
            return Err(Error::SchemaVersion {
                found: rec.version,
                expected: MODULI_SCHEMA_VERSION,
            });
        }
        Ok(Self::new(rec.lambda, Curve::new(rec.points)?))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModuliRecord {
    version: u32,
    lambda: f64,
    points: Vec<[f64; 2]>,
}

/// Tangent vector `(mu, xi)` with the `Y^0` inner product
/// `mu mu' + int_I xi . xi' dz`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TangentModuli {
    pub mu: f64,
    pub xi: Vec<[f64; 2]>,
}

impl TangentModuli {
    pub fn zeros(n_z: usize) -> Self {
        Self {
            mu: 0.0,
            xi: vec![[0.0, 0.0]; n_z],
        }
    }

    pub fn n_z(&self) -> usize {
        self.xi.len()
    }

    pub fn dot(&self, other: &TangentModuli) -> f64 {
        let h = 1.0 / self.n_z() as f64;
        self.mu * other.mu
            + h * self
                .xi
                .iter()
                .zip(&other.xi)
                .map(|(a, b)| a[0] * b[0] + a[1] * b[1])
                .sum::<f64>()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// `a * self + b * other`.
    pub fn lin_comb(&self, a: f64, other: &TangentModuli, b: f64) -> TangentModuli {
        Self {
            mu: a * self.mu + b * other.mu,
            xi: self
                .xi
                .iter()
                .zip(&other.xi)
                .map(|(p, q)| [a * p[0] + b * q[0], a * p[1] + b * q[1]])
                .collect(),
        }
    }

    pub fn scaled(&self, a: f64) -> TangentModuli {
        self.lin_comb(a, self, 0.0)
    }

    /// Max over `z` of `|xi(z)|`.
    pub fn xi_sup(&self) -> f64 {
        self.xi.iter().map(|p| p[0].hypot(p[1])).fold(0.0, f64::max)
    }

    pub fn xi_curve(&self) -> Curve {
        Curve {
            points: self.xi.clone(),
        }
    }
}

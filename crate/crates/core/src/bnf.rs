//! Binormal curvature flow for graphs `z -> (gamma(z), z)` and the effective
//! moduli dynamics `J_sigma^{-1} d_sigma E(f(sigma))`.

use serde::{Deserialize, Serialize};

use crate::curve::{Curve, Moduli, TangentModuli};
use crate::dynamics::gl_gradient;
use crate::error::{Error, Result};
use crate::grid::{inner_product, integrate_with};
use crate::manifold::{FilamentFrame, FilamentModel};
use crate::spectral::PeriodicSpectrum;

/// Arclength factors `z_s = (1 + |gamma_z|^2)^{-1/2}` and
/// `z_ss = -gamma_z . gamma_zz / (1 + |gamma_z|^2)^2` per sample.
pub fn arclength_factors(c: &Curve) -> (Vec<f64>, Vec<f64>) {
    let d1 = c.derivative(1);
    let d2 = c.derivative(2);
    d1.points
        .iter()
        .zip(&d2.points)
        .map(|(a, b)| {
            let q = 1.0 + a[0] * a[0] + a[1] * a[1];
            (1.0 / q.sqrt(), -(a[0] * b[0] + a[1] * b[1]) / (q * q))
        })
        .unzip()
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Velocity of the graph under `d_t X = X_s x X_ss`: the horizontal part of
/// the binormal velocity minus its vertical part times `gamma_z`, so that
/// samples stay at fixed `z`.
pub fn bnf_rhs(c: &Curve) -> Result<Curve> {
    let sp = PeriodicSpectrum::new(c.n_z());
    let d1 = c.derivative_with(&sp, 1);
    let d2 = c.derivative_with(&sp, 2);
    let slope = d1.sup_norm();
    if !(slope < 1.0) {
        return Err(Error::GraphRegime(slope));
    }
    let points = d1
        .points
        .iter()
        .zip(&d2.points)
        .map(|(a, b)| {
            let q = 1.0 + a[0] * a[0] + a[1] * a[1];
            let zs = 1.0 / q.sqrt();
            let zss = -(a[0] * b[0] + a[1] * b[1]) / (q * q);
            let xs = [a[0] * zs, a[1] * zs, zs];
            let xss = [
                b[0] * zs * zs + a[0] * zss,
                b[1] * zs * zs + a[1] * zss,
                zss,
            ];
            let v = cross(xs, xss);
            [v[0] - v[2] * a[0], v[1] - v[2] * a[1]]
        })
        .collect();
    Ok(Curve { points })
}

fn rk4<T: Clone>(
    y: &T,
    dt: f64,
    f: impl Fn(&T) -> Result<T>,
    axpy: impl Fn(&T, &T, f64) -> T,
) -> Result<T> {
    let k1 = f(y)?;
    let k2 = f(&axpy(y, &k1, 0.5 * dt))?;
    let k3 = f(&axpy(y, &k2, 0.5 * dt))?;
    let k4 = f(&axpy(y, &k3, dt))?;
    let mut out = axpy(y, &k1, dt / 6.0);
    out = axpy(&out, &k2, dt / 3.0);
    out = axpy(&out, &k3, dt / 3.0);
    Ok(axpy(&out, &k4, dt / 6.0))
}

fn check_cfl(n_z: usize, dt: f64) -> Result<()> {
    let hz = 1.0 / n_z as f64;
    if !(dt > 0.0 && dt <= 0.5 * hz * hz) {
        return Err(Error::InvalidArgument(format!(
            "dt = {dt} outside (0, h_z^2/2 = {}]",
            0.5 * hz * hz
        )));
    }
    Ok(())
}

/// One classical Runge-Kutta step of the binormal flow.
pub fn bnf_step(c: &Curve, dt: f64) -> Result<Curve> {
    check_cfl(c.n_z(), dt)?;
    rk4(c, dt, bnf_rhs, |a, b, s| a.advanced(&b.points, s))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EffectiveRhs {
    /// `J_sigma^{-1} d_sigma E`.
    pub value: TangentModuli,
    /// `d_sigma E(f(sigma))`; its `mu` part is the gauge pairing `<E'(f), i f>`.
    pub d_sigma_e: TangentModuli,
    /// The curvature-squared contribution `int_x <D^2 v(gamma_z, gamma_z), grad v>`.
    pub curvature_term: Vec<[f64; 2]>,
    pub gauge_degenerate: bool,
}

/// `d_gamma E(f(sigma))(z) = int_x <-grad v . gamma_zz + D^2 v(gamma_z, gamma_z), grad v>`
/// from the analytic derivatives stored in the frame.
fn curve_energy_derivative(frame: &FilamentFrame) -> (Vec<[f64; 2]>, Vec<[f64; 2]>) {
    let v = frame.field();
    let grid = v.grid();
    let nz = grid.n_z();
    let h2 = grid.h_x() * grid.h_x();
    let c = &frame.moduli().curve;
    let a = c.derivative(1);
    let b = c.derivative(2);
    let [d1, d2] = frame.gradient();
    let [d11, d12, d22] = frame.hessian();
    let (d1, d2, d11, d12, d22) = (d1.values(), d2.values(), d11.values(), d12.values(), d22.values());
    let dot = |x: num_complex::Complex64, y: num_complex::Complex64| x.re * y.re + x.im * y.im;
    let mut total = vec![[0.0, 0.0]; nz];
    let mut curv = vec![[0.0, 0.0]; nz];
    for &p in grid.interior() {
        for iz in 0..nz {
            let i = p * nz + iz;
            let [a1, a2] = a.points[iz];
            let [b1, b2] = b.points[iz];
            let hess = d11[i] * (a1 * a1) + d12[i] * (2.0 * a1 * a2) + d22[i] * (a2 * a2);
            let lin = -(d1[i] * b1 + d2[i] * b2);
            curv[iz][0] += dot(hess, d1[i]);
            curv[iz][1] += dot(hess, d2[i]);
            total[iz][0] += dot(lin + hess, d1[i]);
            total[iz][1] += dot(lin + hess, d2[i]);
        }
    }
    let scale = |x: Vec<[f64; 2]>| x.into_iter().map(|[p, q]| [h2 * p, h2 * q]).collect::<Vec<_>>();
    (scale(total), scale(curv))
}

pub fn effective_rhs(model: &FilamentModel, sigma: &Moduli) -> Result<EffectiveRhs> {
    let frame = model.frame(sigma)?;
    let (xi, curvature_term) = curve_energy_derivative(&frame);
    let f = frame.field();
    let grad = gl_gradient(f, model.epsilon());
    let gauge = inner_product(&grad, &f.scaled(num_complex::Complex64::i()))?;
    let d_sigma_e = TangentModuli { mu: gauge, xi };
    let b = frame.symplectic_matrix();
    let sol = b.solve_jsigma(&d_sigma_e)?;
    Ok(EffectiveRhs {
        value: sol.value,
        d_sigma_e,
        curvature_term,
        gauge_degenerate: sol.gauge_degenerate,
    })
}

/// One Runge-Kutta step of `sigma_t = J_sigma^{-1} d_sigma E(f(sigma))`.
pub fn effective_step(model: &FilamentModel, sigma: &Moduli, dt: f64) -> Result<Moduli> {
    check_cfl(sigma.curve.n_z(), dt)?;
    rk4(
        sigma,
        dt,
        |s| {
            let r = effective_rhs(model, s)?;
            Ok(Moduli::new(r.value.mu, Curve { points: r.value.xi }))
        },
        |a, b, s| Moduli::new(a.lambda + s * b.lambda, a.curve.advanced(&b.curve.points, s)),
    )
}

/// `int_x |d1 v|^2` averaged over slices of the frame, the coefficient `A`
/// in `d_gamma E ~ -A gamma_zz`.
pub fn translation_stiffness(frame: &FilamentFrame) -> f64 {
    let [d1, _] = frame.gradient();
    let v = d1.values();
    integrate_with(d1.grid(), |i| v[i].norm_sqr())
}

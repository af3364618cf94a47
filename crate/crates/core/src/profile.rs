//! The planar degree-one vortex `phi(r) e^{i theta}`: radial ODE solve,
//! interpolation, and the profile's energy integrals.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MAX_NEWTON: usize = 200;
const RESIDUAL_TOL: f64 = 1e-10;

/// Tabulated radial amplitude on a geometrically clustered grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RadialProfile {
    pub epsilon: f64,
    pub r_max: f64,
    pub r_samples: Vec<f64>,
    pub phi: Vec<f64>,
    pub phi_prime: Vec<f64>,
    /// Row-equilibrated max-norm of the discrete ODE residual at convergence.
    pub residual: f64,
    pub newton_iterations: usize,
}

/// `psi = phi(r) e^{i theta}` and its derivatives at a point.
#[derive(Clone, Copy, Debug, Default)]
pub struct VortexJet {
    pub psi: Complex64,
    pub d1: Complex64,
    pub d2: Complex64,
    pub d11: Complex64,
    pub d12: Complex64,
    pub d22: Complex64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PlanarEnergy {
    pub kinetic: f64,
    pub potential: f64,
}

impl PlanarEnergy {
    pub fn total(&self) -> f64 {
        self.kinetic + self.potential
    }
}

/// Radial nodes with spacing `h0` at the origin growing geometrically to `r_max`.
fn radial_grid(r_max: f64, n: usize, h0: f64) -> Vec<f64> {
    let cells = (n - 1) as f64;
    let target = r_max / h0;
    let sum = |q: f64| {
        if (q - 1.0).abs() < 1e-14 {
            cells
        } else {
            (q.powf(cells) - 1.0) / (q - 1.0)
        }
    };
    let (mut lo, mut hi) = (1.0, 2.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sum(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let q = 0.5 * (lo + hi);
    let mut r = Vec::with_capacity(n);
    let (mut x, mut h) = (0.0, h0);
    for _ in 0..n - 1 {
        r.push(x);
        x += h;
        h *= q;
    }
    r.push(r_max);
    let scale = r_max / x;
    for v in r.iter_mut() {
        *v *= scale;
    }
    r[n - 1] = r_max;
    r
}

/// Residual of the discrete ODE and its tridiagonal Jacobian `(lower, diag, upper)`.
fn discrete_system(r: &[f64], phi: &[f64], eps: f64) -> (Vec<f64>, [Vec<f64>; 3]) {
    let n = r.len();
    let ie2 = 1.0 / (eps * eps);
    let mut f = vec![0.0; n];
    let mut lower = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n];
    diag[0] = 1.0;
    f[0] = phi[0];
    for i in 1..n - 1 {
        let (hm, hp) = (r[i] - r[i - 1], r[i + 1] - r[i]);
        let s = hm + hp;
        // Second derivative and second-order first derivative on uneven spacing.
        let (a2, b2, c2) = (2.0 / (hm * s), -2.0 / (hm * hp), 2.0 / (hp * s));
        let (a1, b1, c1) = (-hp / (hm * s), (hp - hm) / (hm * hp), hm / (hp * s));
        let ri = r[i];
        let p = phi[i];
        f[i] = a2 * phi[i - 1] + b2 * p + c2 * phi[i + 1]
            + (a1 * phi[i - 1] + b1 * p + c1 * phi[i + 1]) / ri
            - p / (ri * ri)
            + ie2 * (1.0 - p * p) * p;
        lower[i] = a2 + a1 / ri;
        diag[i] = b2 + b1 / ri - 1.0 / (ri * ri) + ie2 * (1.0 - 3.0 * p * p);
        upper[i] = c2 + c1 / ri;
    }
    let h = r[n - 1] - r[n - 2];
    let slope = eps * eps / (r[n - 1] - 0.5 * h).powi(3);
    f[n - 1] = (phi[n - 1] - phi[n - 2]) / h - slope;
    lower[n - 1] = -1.0 / h;
    diag[n - 1] = 1.0 / h;
    (f, [lower, diag, upper])
}

/// Thomas algorithm; `rhs` is overwritten with the solution.
fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64]) {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = diag[0];
    c[0] = upper[0] / d;
    rhs[0] /= d;
    for i in 1..n {
        d = diag[i] - lower[i] * c[i - 1];
        c[i] = upper[i] / d;
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / d;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= c[i] * rhs[i + 1];
    }
}

/// Row-equilibrated max-norm residual: each row divided by its Jacobian
/// diagonal, so the value is measured in units of `phi`.
fn scaled_max(f: &[f64], diag: &[f64]) -> f64 {
    f.iter()
        .zip(diag)
        .map(|(v, d)| (v / d).abs())
        .fold(0.0, f64::max)
}

/// Solves `phi'' + phi'/r - phi/r^2 + eps^-2 (1 - phi^2) phi = 0` with
/// `phi(0) = 0` and the far-field slope `d/dr[1 - eps^2/(2 r^2)]` at `r_max`.
pub fn solve_profile(epsilon: f64, r_max: f64, n: usize) -> Result<RadialProfile> {
    if !(epsilon > 0.0 && epsilon <= 0.25) {
        return Err(Error::EpsilonOutOfRange(epsilon));
    }
    if !(r_max >= 1.0 && r_max.is_finite()) {
        return Err(Error::InvalidArgument(format!("r_max = {r_max} < 1")));
    }
    if n < 512 {
        return Err(Error::InvalidArgument(format!("profile needs n >= 512, got {n}")));
    }
    let h0 = (epsilon / 8.0).min(r_max / (2.0 * (n - 1) as f64));
    let r = radial_grid(r_max, n, h0);
    let mut phi: Vec<f64> = r
        .iter()
        .map(|&x| x / (x * x + 2.0 * epsilon * epsilon).sqrt())
        .collect();
    let (mut f, mut jac) = discrete_system(&r, &phi, epsilon);
    let mut res = scaled_max(&f, &jac[1]);
    let mut iterations = 0;
    while res > RESIDUAL_TOL {
        if iterations == MAX_NEWTON {
            return Err(Error::ProfileSolveFailed(format!(
                "no convergence after {MAX_NEWTON} Newton steps (residual {res:e})"
            )));
        }
        iterations += 1;
        let mut step: Vec<f64> = f.iter().map(|v| -v).collect();
        solve_tridiagonal(&jac[0], &jac[1], &jac[2], &mut step);
        let mut t = 1.0;
        loop {
            let trial: Vec<f64> = phi.iter().zip(&step).map(|(p, s)| p + t * s).collect();
            let (ft, jt) = discrete_system(&r, &trial, epsilon);
            let rt = scaled_max(&ft, &jt[1]);
            if rt < res || t < 1e-3 {
                phi = trial;
                f = ft;
                jac = jt;
                res = rt;
                break;
            }
            t *= 0.5;
        }
        if !res.is_finite() {
            return Err(Error::ProfileSolveFailed("non-finite residual".into()));
        }
    }
    let phi_prime = node_slopes(&r, &phi, epsilon);
    Ok(RadialProfile {
        epsilon,
        r_max,
        r_samples: r,
        phi,
        phi_prime,
        residual: res,
        newton_iterations: iterations,
    })
}

/// Finite-difference weights for the first derivative at `x0` (Fornberg).
fn first_derivative_weights(x0: f64, xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut c = vec![[0.0f64; 2]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mn = i.min(1);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|w| w[1]).collect()
}

/// Fourth-order node derivatives (five-point stencils, using the odd
/// reflection `phi(-r) = -phi(r)` near the origin), limited so the Hermite
/// interpolant stays monotone (Fritsch-Carlson).
fn node_slopes(r: &[f64], phi: &[f64], eps: f64) -> Vec<f64> {
    let n = r.len();
    let mut d = vec![0.0; n];
    for i in 0..n - 1 {
        let lo = (i as i64 - 2).min(n as i64 - 5).max(-2);
        let mut xs = Vec::with_capacity(5);
        let mut ys = Vec::with_capacity(5);
        for k in lo..lo + 5 {
            if k < 0 {
                xs.push(-r[(-k) as usize]);
                ys.push(-phi[(-k) as usize]);
            } else {
                xs.push(r[k as usize]);
                ys.push(phi[k as usize]);
            }
        }
        let w = first_derivative_weights(r[i], &xs);
        d[i] = w.iter().zip(&ys).map(|(a, b)| a * b).sum();
    }
    d[n - 1] = eps * eps / r[n - 1].powi(3);
    for i in 0..n - 1 {
        let delta = (phi[i + 1] - phi[i]) / (r[i + 1] - r[i]);
        if delta <= 0.0 {
            d[i] = 0.0;
            d[i + 1] = 0.0;
            continue;
        }
        let (a, b) = (d[i] / delta, d[i + 1] / delta);
        let m = a * a + b * b;
        if m > 9.0 {
            let t = 3.0 / m.sqrt();
            d[i] = t * a * delta;
            d[i + 1] = t * b * delta;
        }
    }
    d
}

impl RadialProfile {
    /// Odd cubic `a r + b r^3` matching value and slope at the first node.
    fn core_coefficients(&self) -> (f64, f64) {
        let r1 = self.r_samples[1];
        let (p, dp) = (self.phi[1], self.phi_prime[1]);
        let b = (dp * r1 - p) / (2.0 * r1 * r1 * r1);
        let a = (3.0 * p - dp * r1) / (2.0 * r1);
        (a, b)
    }

    fn locate(&self, r: f64) -> usize {
        let i = self.r_samples.partition_point(|&x| x <= r);
        i.clamp(1, self.r_samples.len() - 1) - 1
    }

    /// `(phi, phi')` at radius `r`.
    pub fn value_and_slope(&self, r: f64) -> Result<(f64, f64)> {
        if !(r >= 0.0) || r > self.r_max * (1.0 + 1e-12) {
            return Err(Error::OutsideProfileRange {
                r,
                r_max: self.r_max,
            });
        }
        let r1 = self.r_samples[1];
        if r < r1 {
            let (a, b) = self.core_coefficients();
            return Ok((a * r + b * r * r * r, a + 3.0 * b * r * r));
        }
        let i = self.locate(r);
        let (x0, x1) = (self.r_samples[i], self.r_samples[i + 1]);
        let h = x1 - x0;
        let t = ((r - x0) / h).clamp(0.0, 1.0);
        let (p0, p1) = (self.phi[i], self.phi[i + 1]);
        let (m0, m1) = (self.phi_prime[i] * h, self.phi_prime[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let v = (2.0 * t3 - 3.0 * t2 + 1.0) * p0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * p1
            + (t3 - t2) * m1;
        let dv = ((6.0 * t2 - 6.0 * t) * p0
            + (3.0 * t2 - 4.0 * t + 1.0) * m0
            + (-6.0 * t2 + 6.0 * t) * p1
            + (3.0 * t2 - 2.0 * t) * m1)
            / h;
        Ok((v, dv))
    }

    pub fn eval(&self, r: f64) -> Result<f64> {
        self.value_and_slope(r).map(|(v, _)| v)
    }

    /// `g = phi/r`, `G1 = g'/r`, `G2 = (g'' - g'/r)/r^2`, with `phi''` taken
    /// from the ODE.
    fn radial_factors(&self, r: f64) -> Result<(f64, f64, f64)> {
        if r < self.r_samples[1] {
            self.value_and_slope(r)?;
            let (a, b) = self.core_coefficients();
            return Ok((a + b * r * r, 2.0 * b, 0.0));
        }
        let (p, dp) = self.value_and_slope(r)?;
        let ie2 = 1.0 / (self.epsilon * self.epsilon);
        let ddp = -dp / r + p / (r * r) - ie2 * (1.0 - p * p) * p;
        let g = p / r;
        let dg = (dp - g) / r;
        let ddg = (ddp - 2.0 * dg) / r;
        Ok((g, dg / r, (ddg - dg / r) / (r * r)))
    }

    /// `phi(|x|) e^{i theta(x)}`; zero at the origin.
    pub fn eval_vortex(&self, x: [f64; 2]) -> Result<Complex64> {
        let r = x[0].hypot(x[1]);
        let g = if r < self.r_samples[1] {
            self.value_and_slope(r)?;
            let (a, b) = self.core_coefficients();
            a + b * r * r
        } else {
            self.eval(r)? / r
        };
        Ok(Complex64::new(x[0], x[1]) * g)
    }

    /// Value and first and second Cartesian derivatives of the vortex.
    pub fn vortex_jet(&self, x: [f64; 2]) -> Result<VortexJet> {
        let r = x[0].hypot(x[1]);
        let (g, g1, g2) = self.radial_factors(r)?;
        let (x1, x2) = (x[0], x[1]);
        let z = Complex64::new(x1, x2);
        let i = Complex64::i();
        Ok(VortexJet {
            psi: g * z,
            d1: g1 * x1 * z + g,
            d2: g1 * x2 * z + i * g,
            d11: g2 * x1 * x1 * z + g1 * (z + 2.0 * x1),
            d12: g2 * x1 * x2 * z + g1 * Complex64::new(x2, x1),
            d22: g2 * x2 * x2 * z + g1 * (z + 2.0 * i * x2),
        })
    }

    /// Radial quadrature (3-point Gauss-Legendre per cell) of
    /// `2 pi r f(r, phi, phi')` over `[0, radius]`.
    fn radial_integral(&self, radius: f64, f: impl Fn(f64, f64, f64) -> f64) -> Result<f64> {
        if radius > self.r_max * (1.0 + 1e-12) || !(radius > 0.0) {
            return Err(Error::OutsideProfileRange {
                r: radius,
                r_max: self.r_max,
            });
        }
        let nodes = [-(0.6f64).sqrt(), 0.0, (0.6f64).sqrt()];
        let weights = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
        let mut total = 0.0;
        for w in self.r_samples.windows(2) {
            let (a, b) = (w[0], w[1].min(radius));
            if a >= radius {
                break;
            }
            let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
            for (t, wt) in nodes.iter().zip(weights) {
                let r = mid + half * t;
                let (p, dp) = self.value_and_slope(r)?;
                total += wt * half * 2.0 * PI * r * f(r, p, dp);
            }
        }
        Ok(total)
    }

    /// Kinetic and potential parts of the planar energy on the disc of the
    /// given radius.
    pub fn planar_energy_parts(&self, disc_radius: f64) -> Result<PlanarEnergy> {
        let ie2 = 1.0 / (self.epsilon * self.epsilon);
        let kinetic =
            self.radial_integral(disc_radius, |r, p, dp| 0.5 * (dp * dp + (p / r) * (p / r)))?;
        let potential = self.radial_integral(disc_radius, |_, p, _| {
            0.25 * ie2 * (p * p - 1.0) * (p * p - 1.0)
        })?;
        Ok(PlanarEnergy { kinetic, potential })
    }

    pub fn planar_energy(&self, disc_radius: f64) -> Result<f64> {
        self.planar_energy_parts(disc_radius).map(|e| e.total())
    }

    /// `int_{|x| < R} |d_{x1} psi|^2`, half the Dirichlet integral by symmetry.
    pub fn translation_stiffness(&self, disc_radius: f64) -> Result<f64> {
        self.radial_integral(disc_radius, |r, p, dp| 0.5 * (dp * dp + (p / r) * (p / r)))
    }

    /// `int_{|x| < R} |psi|^2`.
    pub fn mass(&self, disc_radius: f64) -> Result<f64> {
        self.radial_integral(disc_radius, |_, p, _| p * p)
    }

    /// Largest sampled `max(phi', phi/r)`.
    pub fn max_gradient(&self) -> f64 {
        self.r_samples
            .iter()
            .zip(self.phi.iter().zip(&self.phi_prime))
            .skip(1)
            .map(|(&r, (&p, &dp))| dp.max(p / r))
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radial_grid_is_increasing_and_spans() {
        let r = radial_grid(2.0, 600, 0.001);
        assert_eq!(r[0], 0.0);
        assert_eq!(*r.last().unwrap(), 2.0);
        assert!(r.windows(2).all(|w| w[1] > w[0]));
        assert!((r[1] - 0.001).abs() / 0.001 < 1e-6);
    }

    #[test]
    fn tridiagonal_solve() {
        let lower = [0.0, 1.0, 1.0];
        let diag = [4.0, 4.0, 4.0];
        let upper = [1.0, 1.0, 0.0];
        let mut rhs = [5.0, 6.0, 5.0];
        solve_tridiagonal(&lower, &diag, &upper, &mut rhs);
        for v in rhs {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(matches!(solve_profile(0.3, 2.0, 1024), Err(Error::EpsilonOutOfRange(_))));
        assert!(solve_profile(0.1, 0.5, 1024).is_err());
        assert!(solve_profile(0.1, 2.0, 100).is_err());
    }

    #[test]
    fn profile_basic_shape() {
        let p = solve_profile(0.1, 2.0, 2048).unwrap();
        assert_eq!(p.phi[0], 0.0);
        assert!(p.residual <= 1e-10);
        assert!(p.phi.windows(2).all(|w| w[1] > w[0]));
        assert!(p.phi.iter().all(|&v| v < 1.0));
        assert_eq!(p.eval_vortex([0.0, 0.0]).unwrap(), Complex64::new(0.0, 0.0));
        let a = p.eval_vortex([0.3, 0.0]).unwrap();
        let b = p.eval_vortex([0.0, 0.3]).unwrap();
        assert!(a.im.abs() < 1e-15 && a.re > 0.0);
        assert!((b - Complex64::i() * a).norm() < 1e-14);
        assert!(matches!(
            p.eval_vortex([2.5, 0.0]),
            Err(Error::OutsideProfileRange { .. })
        ));
    }

    #[test]
    fn jet_matches_finite_differences() {
        let p = solve_profile(0.1, 2.0, 2048).unwrap();
        let s = 1e-5;
        for x in [[0.05, 0.02], [0.2, -0.13], [-0.4, 0.7], [0.001, 0.0005]] {
            let j = p.vortex_jet(x).unwrap();
            let f = |y: [f64; 2]| p.eval_vortex(y).unwrap();
            let d1 = (f([x[0] + s, x[1]]) - f([x[0] - s, x[1]])) / (2.0 * s);
            let d2 = (f([x[0], x[1] + s]) - f([x[0], x[1] - s])) / (2.0 * s);
            assert!((j.d1 - d1).norm() < 1e-4 * (1.0 + d1.norm()), "{x:?}");
            assert!((j.d2 - d2).norm() < 1e-4 * (1.0 + d2.norm()), "{x:?}");
            let g = |y: [f64; 2]| p.vortex_jet(y).unwrap();
            let d11 = (g([x[0] + s, x[1]]).d1 - g([x[0] - s, x[1]]).d1) / (2.0 * s);
            let d12 = (g([x[0], x[1] + s]).d1 - g([x[0], x[1] - s]).d1) / (2.0 * s);
            let d22 = (g([x[0], x[1] + s]).d2 - g([x[0], x[1] - s]).d2) / (2.0 * s);
            let scale = 1.0 + d11.norm() + d22.norm();
            assert!((j.d11 - d11).norm() < 1e-2 * scale, "{x:?} {:?} {:?}", j.d11, d11);
            assert!((j.d12 - d12).norm() < 1e-2 * scale, "{x:?}");
            assert!((j.d22 - d22).norm() < 1e-2 * scale, "{x:?}");
        }
    }
}

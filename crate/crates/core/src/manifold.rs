//! The manifold of approximate vortex filaments
//! `f(sigma) = e^{i lambda} psi(x - gamma(z))`, its tangent map and adjoint,
//! the pulled-back symplectic operator and the moduli fit.
//!
//! The field-space symplectic inverse is multiplication by `i`. The operator
//! `J_sigma = g* i g` is assembled from exactly the same nodal samples and
//! quadrature as the tangent map, so the matrix form and the composed form
//! agree to rounding.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::curve::{Moduli, TangentModuli};
use crate::error::{Error, Result};
use crate::grid::{inner_product, sobolev_norm, ComplexField, Grid};
use crate::profile::RadialProfile;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn dot(a: Complex64, b: Complex64) -> f64 {
    a.re * b.re + a.im * b.im
}

/// Builds filament fields on a fixed grid from a fixed profile.
#[derive(Clone, Debug)]
pub struct FilamentModel {
    grid: Arc<Grid>,
    profile: Arc<RadialProfile>,
    max_offset: f64,
}

/// `f(sigma)` together with the analytic first and second `x`-derivatives of
/// `e^{i lambda} psi_gamma` at interior nodes.
#[derive(Clone, Debug)]
pub struct FilamentFrame {
    moduli: Moduli,
    field: ComplexField,
    d1: ComplexField,
    d2: ComplexField,
    d11: ComplexField,
    d12: ComplexField,
    d22: ComplexField,
}

/// Per-`z` samples of the 3x3 matrix representing `J_sigma` on `(mu, xi)`.
/// The `lambda` row acts by `int_I (B12 xi1 + B13 xi2) dz`, so its entries
/// are kept as densities in `z`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SymplecticMatrixField {
    pub b12: Vec<f64>,
    pub b13: Vec<f64>,
    pub b21: Vec<f64>,
    pub b31: Vec<f64>,
    pub b23: Vec<f64>,
    pub b32: Vec<f64>,
    /// `int_x <d1 v, d2 v>` per slice; the diagonal blocks do not depend on it.
    pub cross: Vec<f64>,
    /// Diagonal entries `int_x <d_j v, i d_j v>`, identically zero pointwise.
    pub diagonal: Vec<[f64; 2]>,
}

#[derive(Clone, Debug)]
pub struct JsigmaSolution {
    pub value: TangentModuli,
    /// The `lambda` pivot fell below `1e-8 ||B||`; `mu` was fixed to zero.
    pub gauge_degenerate: bool,
    /// Defect of the `lambda` row at the returned solution.
    pub lambda_residual: f64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct FitOptions {
    pub tol: f64,
    pub max_iterations: usize,
    /// Reject inputs farther than this from `f(sigma_init)` in `X^2`.
    pub capture_radius: Option<f64>,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iterations: 50,
            capture_radius: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct FitOutcome {
    pub moduli: Moduli,
    /// `Y^0` norm of the fitted conditions: the gauge row `<u - f, i v>` and
    /// the curve rows of `g* i (u - f)`.
    pub residual: f64,
    /// The literal `lambda` row `<u - f, v>` of `g* i (u - f)`.
    pub lambda_row: f64,
    pub iterations: usize,
}

impl FilamentModel {
    pub fn new(grid: Arc<Grid>, profile: Arc<RadialProfile>) -> Result<Self> {
        let radius = grid.spec().disc_radius;
        let reach = radius * (1.0 + 0.5) + 2.0 * grid.h_x();
        if profile.r_max < reach {
            return Err(Error::InvalidArgument(format!(
                "profile r_max = {} does not cover shifted evaluations up to {reach}",
                profile.r_max
            )));
        }
        Ok(Self {
            grid,
            profile,
            max_offset: 0.5 * radius,
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn profile(&self) -> &Arc<RadialProfile> {
        &self.profile
    }

    pub fn epsilon(&self) -> f64 {
        self.profile.epsilon
    }

    pub fn max_offset(&self) -> f64 {
        self.max_offset
    }

    fn check_moduli(&self, sigma: &Moduli) -> Result<()> {
        if sigma.curve.n_z() != self.grid.n_z() {
            return Err(Error::InvalidArgument(format!(
                "curve has {} samples, grid has n_z = {}",
                sigma.curve.n_z(),
                self.grid.n_z()
            )));
        }
        if !sigma.lambda.is_finite() {
            return Err(Error::InvalidArgument("non-finite lambda".into()));
        }
        let distance = sigma.curve.sup_norm();
        if !(distance <= self.max_offset) {
            return Err(Error::FilamentTooClose {
                distance,
                limit: self.max_offset,
            });
        }
        Ok(())
    }

    pub fn frame(&self, sigma: &Moduli) -> Result<FilamentFrame> {
        self.check_moduli(sigma)?;
        let grid = &self.grid;
        let nz = grid.n_z();
        let phase = Complex64::from_polar(1.0, sigma.lambda);
        let mut fields: [ComplexField; 6] = std::array::from_fn(|_| ComplexField::zeros(grid));
        for &p in grid.active() {
            let x = grid.position(p);
            let interior = grid.compact_index(p).is_some();
            for iz in 0..nz {
                let c = sigma.curve.points[iz];
                let i = p * nz + iz;
                let y = [x[0] - c[0], x[1] - c[1]];
                if interior {
                    let jet = self.profile.vortex_jet(y)?;
                    let vals = [jet.psi, jet.d1, jet.d2, jet.d11, jet.d12, jet.d22];
                    for (f, v) in fields.iter_mut().zip(vals) {
                        f.values_mut()[i] = phase * v;
                    }
                } else {
                    fields[0].values_mut()[i] = phase * self.profile.eval_vortex(y)?;
                }
            }
        }
        let [field, d1, d2, d11, d12, d22] = fields;
        Ok(FilamentFrame {
            moduli: sigma.clone(),
            field,
            d1,
            d2,
            d11,
            d12,
            d22,
        })
    }

    /// `f(sigma)`, with the trace on the boundary band from the same formula.
    pub fn build_filament(&self, sigma: &Moduli) -> Result<ComplexField> {
        Ok(self.frame(sigma)?.field)
    }

    /// The conditions solved by [`FilamentModel::moduli_fit`] at `sigma`, and
    /// the literal `lambda` row `<u - f(sigma), f(sigma)>`.
    pub fn fit_conditions(&self, u: &ComplexField, sigma: &Moduli) -> Result<(TangentModuli, f64)> {
        if !u.grid().same_as(&self.grid) {
            return Err(Error::GridMismatch);
        }
        Ok(self.fit_residual(&self.frame(sigma)?, u))
    }

    fn fit_residual(&self, frame: &FilamentFrame, u: &ComplexField) -> (TangentModuli, f64) {
        let diff = frame.interior_difference(u);
        let v = frame.field.values();
        let d = diff.values();
        let gauge = crate::grid::integrate_with(&self.grid, |i| dot(d[i], I * v[i]));
        let lambda_row = crate::grid::integrate_with(&self.grid, |i| dot(d[i], v[i]));
        let mut f = frame.adjoint_map_unchecked(&diff.scaled(I));
        f.mu = gauge;
        (f, lambda_row)
    }

    /// Solves `K chi = rhs`, where `K` is the derivative of the fitted
    /// conditions at `u = f(sigma)`: the curve rows are those of `J_sigma`
    /// and the gauge row is `chi -> <g chi, i v>`.
    fn fit_step(&self, frame: &FilamentFrame, b: &SymplecticMatrixField, rhs: &TangentModuli) -> Result<TangentModuli> {
        let grid = &self.grid;
        let nz = grid.n_z();
        let hz = grid.h_z();
        let h2 = grid.h_x() * grid.h_x();
        let v = frame.field.values();
        let (d1, d2) = (frame.d1.values(), frame.d2.values());
        let mut c1 = vec![0.0; nz];
        let mut c2 = vec![0.0; nz];
        for &p in grid.interior() {
            for iz in 0..nz {
                let i = p * nz + iz;
                c1[iz] += dot(d1[i], I * v[i]);
                c2[iz] += dot(d2[i], I * v[i]);
            }
        }
        let mass = frame.field.norm().powi(2);
        let mut pivot = mass;
        let mut shift = rhs.mu;
        for iz in 0..nz {
            b.check_block(iz)?;
            let (c1, c2) = (h2 * c1[iz], h2 * c2[iz]);
            let [r1, r2] = rhs.xi[iz];
            pivot += hz * (c1 * b.b31[iz] / b.b32[iz] + c2 * b.b21[iz] / b.b23[iz]);
            shift += hz * (c1 * r2 / b.b32[iz] + c2 * r1 / b.b23[iz]);
        }
        let mu = shift / pivot;
        let xi = (0..nz)
            .map(|iz| {
                let [r1, r2] = rhs.xi[iz];
                [
                    (r2 - b.b31[iz] * mu) / b.b32[iz],
                    (r1 - b.b21[iz] * mu) / b.b23[iz],
                ]
            })
            .collect();
        Ok(TangentModuli { mu, xi })
    }

    /// Newton iteration for the moduli whose filament is symplectically
    /// orthogonal to `u - f(sigma)` along the curve directions, with the
    /// gauge fixed by `<u - f(sigma), i f(sigma)> = 0`.
    pub fn moduli_fit(&self, u: &ComplexField, sigma_init: &Moduli, opts: &FitOptions) -> Result<FitOutcome> {
        if !u.grid().same_as(&self.grid) {
            return Err(Error::GridMismatch);
        }
        let mut frame = self.frame(sigma_init)?;
        if let Some(radius) = opts.capture_radius {
            let dist = sobolev_norm(&frame.interior_difference(u), 2)?;
            if dist > radius {
                return Err(Error::ProjectionLost(format!(
                    "initial distance {dist:e} exceeds capture radius {radius:e}"
                )));
            }
        }
        let (mut f, mut lambda_row) = self.fit_residual(&frame, u);
        let mut res = f.norm();
        let mut iterations = 0;
        while res > opts.tol {
            if iterations == opts.max_iterations {
                return Err(Error::ProjectionLost(format!(
                    "no convergence in {iterations} iterations (residual {res:e})"
                )));
            }
            iterations += 1;
            let b = frame.symplectic_matrix();
            let step = self.fit_step(&frame, &b, &f)?;
            let mut s = 1.0;
            let mut accepted = None;
            for level in 0..=5 {
                let trial = frame.moduli.advanced(&step, s);
                let next = self.frame(&trial).map(|fr| {
                    let (f2, l2) = self.fit_residual(&fr, u);
                    (fr, f2, l2)
                });
                match next {
                    Ok((fr, f2, l2)) if f2.norm() < res || level == 5 => {
                        accepted = Some((fr, f2, l2));
                        break;
                    }
                    Err(e) if level == 5 => return Err(e),
                    _ => s *= 0.5,
                }
            }
            let (fr, f2, l2) = accepted.expect("damping loop always accepts at the last level");
            frame = fr;
            res = f2.norm();
            f = f2;
            lambda_row = l2;
            if !res.is_finite() {
                return Err(Error::ProjectionLost("non-finite residual".into()));
            }
        }
        Ok(FitOutcome {
            moduli: frame.moduli,
            residual: res,
            lambda_row,
            iterations,
        })
    }
}

impl FilamentFrame {
    pub fn moduli(&self) -> &Moduli {
        &self.moduli
    }

    pub fn field(&self) -> &ComplexField {
        &self.field
    }

    pub fn into_field(self) -> ComplexField {
        self.field
    }

    /// `(d1 v, d2 v)` at interior nodes.
    pub fn gradient(&self) -> [&ComplexField; 2] {
        [&self.d1, &self.d2]
    }

    /// `(d11 v, d12 v, d22 v)` at interior nodes.
    pub fn hessian(&self) -> [&ComplexField; 3] {
        [&self.d11, &self.d12, &self.d22]
    }

    fn grid(&self) -> &Arc<Grid> {
        self.field.grid()
    }

    /// `u - f(sigma)` on interior nodes, zero on the band.
    pub fn interior_difference(&self, u: &ComplexField) -> ComplexField {
        let grid = self.grid();
        let nz = grid.n_z();
        let mut out = ComplexField::zeros(grid);
        let (a, b) = (u.values(), self.field.values());
        let o = out.values_mut();
        for &p in grid.interior() {
            for i in p * nz..(p + 1) * nz {
                o[i] = a[i] - b[i];
            }
        }
        out
    }

    /// `g_sigma(mu, xi) = i mu v - xi . grad_x v`, zero on the band.
    pub fn tangent_map(&self, chi: &TangentModuli) -> ComplexField {
        let grid = self.grid();
        let nz = grid.n_z();
        let mut out = ComplexField::zeros(grid);
        let (v, d1, d2) = (self.field.values(), self.d1.values(), self.d2.values());
        let o = out.values_mut();
        for &p in grid.interior() {
            for iz in 0..nz {
                let i = p * nz + iz;
                let [x1, x2] = chi.xi[iz];
                o[i] = I * chi.mu * v[i] - x1 * d1[i] - x2 * d2[i];
            }
        }
        out
    }

    fn adjoint_map_unchecked(&self, phi: &ComplexField) -> TangentModuli {
        let grid = self.grid();
        let nz = grid.n_z();
        let h2 = grid.h_x() * grid.h_x();
        let (v, d1, d2, f) = (self.field.values(), self.d1.values(), self.d2.values(), phi.values());
        let mut xi = vec![[0.0, 0.0]; nz];
        let mut mu = 0.0;
        for &p in grid.interior() {
            for iz in 0..nz {
                let i = p * nz + iz;
                mu += dot(f[i], I * v[i]);
                xi[iz][0] -= dot(d1[i], f[i]);
                xi[iz][1] -= dot(d2[i], f[i]);
            }
        }
        for x in xi.iter_mut() {
            x[0] *= h2;
            x[1] *= h2;
        }
        TangentModuli {
            mu: mu * grid.weight(),
            xi,
        }
    }

    /// `g_sigma^* phi` with respect to the `X` and `Y^0` inner products.
    pub fn adjoint_map(&self, phi: &ComplexField) -> Result<TangentModuli> {
        if !phi.grid().same_as(self.grid()) {
            return Err(Error::GridMismatch);
        }
        Ok(self.adjoint_map_unchecked(phi))
    }

    pub fn symplectic_matrix(&self) -> SymplecticMatrixField {
        let grid = self.grid();
        let nz = grid.n_z();
        let h2 = grid.h_x() * grid.h_x();
        let (v, d1, d2) = (self.field.values(), self.d1.values(), self.d2.values());
        let mut s1 = vec![0.0; nz];
        let mut s2 = vec![0.0; nz];
        let mut c = vec![0.0; nz];
        let mut cross = vec![0.0; nz];
        let mut diagonal = vec![[0.0, 0.0]; nz];
        for &p in grid.interior() {
            for iz in 0..nz {
                let i = p * nz + iz;
                s1[iz] += dot(d1[i], v[i]);
                s2[iz] += dot(d2[i], v[i]);
                c[iz] += dot(d1[i], I * d2[i]);
                cross[iz] += dot(d1[i], d2[i]);
                diagonal[iz][0] += dot(d1[i], I * d1[i]);
                diagonal[iz][1] += dot(d2[i], I * d2[i]);
            }
        }
        let scale = |x: Vec<f64>| -> Vec<f64> { x.into_iter().map(|y| h2 * y).collect() };
        let (s1, s2, c) = (scale(s1), scale(s2), scale(c));
        SymplecticMatrixField {
            b12: s1.iter().map(|x| -x).collect(),
            b13: s2.iter().map(|x| -x).collect(),
            b21: s1,
            b31: s2,
            b32: c.iter().map(|x| -x).collect(),
            b23: c,
            cross: scale(cross),
            diagonal: diagonal.into_iter().map(|[a, b]| [h2 * a, h2 * b]).collect(),
        }
    }

    /// `Q_sigma = g J^{-1}_sigma g* i`, with the gauge component of the
    /// inverse fixed to zero when the `lambda` pivot degenerates.
    pub fn project_q(&self, phi: &ComplexField) -> Result<ComplexField> {
        let b = self.symplectic_matrix();
        let rhs = self.adjoint_map(&phi.scaled(I))?;
        let sol = b.solve_jsigma(&rhs)?;
        Ok(self.tangent_map(&sol.value))
    }

    /// `X^0`-orthogonal projection onto the complement of
    /// `{i d1 v, i d2 v}` on every slice (the kernel of `Q_sigma`), and also of
    /// `{v, i v}` when `with_gauge` is set. The result vanishes on the band.
    pub fn orthogonal_complement(&self, w: &ComplexField, with_gauge: bool) -> Result<ComplexField> {
        let grid = self.grid();
        if !w.grid().same_as(grid) {
            return Err(Error::GridMismatch);
        }
        let nz = grid.n_z();
        let mut basis: Vec<ComplexField> = Vec::with_capacity(2 * nz + 2);
        if with_gauge {
            let mut v = self.field.clone();
            v.zero_boundary();
            basis.push(v.scaled(I));
            basis.push(v);
        }
        for iz in 0..nz {
            for d in [&self.d1, &self.d2] {
                let mut slice = ComplexField::zeros(grid);
                let (src, dst) = (d.values(), slice.values_mut());
                for &p in grid.interior() {
                    dst[p * nz + iz] = I * src[p * nz + iz];
                }
                basis.push(slice);
            }
        }
        let mut out = w.clone();
        out.zero_boundary();
        let m = basis.len();
        let gram = DMatrix::from_fn(m, m, |a, b| inner_product(&basis[a], &basis[b]).unwrap_or(0.0));
        let rhs = DVector::from_iterator(m, basis.iter().map(|e| inner_product(e, &out).unwrap_or(0.0)));
        let coef = gram
            .cholesky()
            .ok_or_else(|| Error::InvalidArgument("dependent zero-mode basis".into()))?
            .solve(&rhs);
        for (e, c) in basis.iter().zip(coef.iter()) {
            out.axpy(Complex64::new(-c, 0.0), e)?;
        }
        Ok(out)
    }
}

impl SymplecticMatrixField {
    pub fn n_z(&self) -> usize {
        self.b23.len()
    }

    /// Largest entry magnitude.
    pub fn norm(&self) -> f64 {
        [&self.b12, &self.b13, &self.b21, &self.b31, &self.b23, &self.b32]
            .iter()
            .flat_map(|v| v.iter())
            .fold(0.0f64, |m, x| m.max(x.abs()))
    }

    fn check_block(&self, iz: usize) -> Result<()> {
        let det = -self.b23[iz] * self.b32[iz];
        if !(det.is_finite() && det.abs() > 1e-300) {
            return Err(Error::SingularBlock(iz));
        }
        Ok(())
    }

    pub fn apply(&self, chi: &TangentModuli) -> TangentModuli {
        let hz = 1.0 / self.n_z() as f64;
        let mu = hz
            * (0..self.n_z())
                .map(|iz| self.b12[iz] * chi.xi[iz][0] + self.b13[iz] * chi.xi[iz][1])
                .sum::<f64>();
        let xi = (0..self.n_z())
            .map(|iz| {
                let [x1, x2] = chi.xi[iz];
                [
                    self.b21[iz] * chi.mu + self.b23[iz] * x2,
                    self.b31[iz] * chi.mu + self.b32[iz] * x1,
                ]
            })
            .collect();
        TangentModuli { mu, xi }
    }

    /// Coefficient of `mu` in the `lambda` row after eliminating `xi`.
    pub fn lambda_pivot(&self) -> f64 {
        let hz = 1.0 / self.n_z() as f64;
        -hz * (0..self.n_z())
            .map(|iz| {
                self.b12[iz] * self.b31[iz] / self.b32[iz] + self.b13[iz] * self.b21[iz] / self.b23[iz]
            })
            .sum::<f64>()
    }

    /// Solves `J_sigma chi = rhs`: the per-slice 2x2 blocks determine `xi`
    /// from `mu`, then the eliminated `lambda` row determines `mu` unless its
    /// pivot is degenerate, in which case `mu = 0`.
    pub fn solve_jsigma(&self, rhs: &TangentModuli) -> Result<JsigmaSolution> {
        let nz = self.n_z();
        if rhs.n_z() != nz {
            return Err(Error::InvalidArgument("tangent/matrix size mismatch".into()));
        }
        for iz in 0..nz {
            self.check_block(iz)?;
        }
        let hz = 1.0 / nz as f64;
        let pivot = self.lambda_pivot();
        let gauge_degenerate = pivot.abs() < 1e-8 * self.norm();
        let mu = if gauge_degenerate {
            0.0
        } else {
            let known: f64 = (0..nz)
                .map(|iz| {
                    let [r1, r2] = rhs.xi[iz];
                    self.b12[iz] * r2 / self.b32[iz] + self.b13[iz] * r1 / self.b23[iz]
                })
                .sum::<f64>()
                * hz;
            (rhs.mu - known) / pivot
        };
        let xi = (0..nz)
            .map(|iz| {
                let [r1, r2] = rhs.xi[iz];
                [
                    (r2 - self.b31[iz] * mu) / self.b32[iz],
                    (r1 - self.b21[iz] * mu) / self.b23[iz],
                ]
            })
            .collect();
        let value = TangentModuli { mu, xi };
        let lambda_residual = self.apply(&value).mu - rhs.mu;
        Ok(JsigmaSolution {
            value,
            gauge_degenerate,
            lambda_residual,
        })
    }
}

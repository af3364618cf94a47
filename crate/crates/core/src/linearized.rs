//! The Hessian `L_sigma` of the energy at `f(sigma)`, the nonlinear remainder
//! `N_sigma`, approximate zero modes and the coercivity gap on the kernel of
//! `Q_sigma`.

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::banded::{BandedLdl, SymmetricBand};
use crate::curve::Moduli;
use crate::dynamics::interior_bandwidth;
use crate::error::{Error, Result};
use crate::grid::{inner_product, laplacian, ComplexField, Grid};
use crate::manifold::{FilamentFrame, FilamentModel};
use crate::profile::RadialProfile;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `L_sigma phi = -Delta phi + eps^-2 (|v|^2 - 1) phi + 2 eps^-2 v <v, phi>`
/// with `v = f(sigma)` and the pointwise real pairing `<a, b> = Re(conj(a) b)`.
/// The operator is real-linear.
pub struct LinearOperator {
    frame: FilamentFrame,
    profile: Arc<RadialProfile>,
    epsilon: f64,
}

impl LinearOperator {
    pub fn new(model: &FilamentModel, sigma: &Moduli) -> Result<Self> {
        Ok(Self {
            frame: model.frame(sigma)?,
            profile: Arc::clone(model.profile()),
            epsilon: model.epsilon(),
        })
    }

    pub fn frame(&self) -> &FilamentFrame {
        &self.frame
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.frame.field().grid()
    }

    /// Applies `L_sigma` to a field with zero trace.
    pub fn apply(&self, phi: &ComplexField) -> Result<ComplexField> {
        if !phi.grid().same_as(self.grid()) {
            return Err(Error::GridMismatch);
        }
        let trace = phi.max_trace();
        if trace > 0.0 {
            return Err(Error::NonzeroTrace(trace));
        }
        Ok(self.apply_any(phi))
    }

    /// Applies the operator formula at interior nodes, reading whatever trace
    /// `phi` carries as Dirichlet data.
    pub fn apply_any(&self, phi: &ComplexField) -> ComplexField {
        let grid = self.grid();
        let ie2 = 1.0 / (self.epsilon * self.epsilon);
        let mut out = laplacian(phi);
        let v = self.frame.field().values();
        let f = phi.values();
        let o = out.values_mut();
        let nz = grid.n_z();
        for &p in grid.interior() {
            for i in p * nz..(p + 1) * nz {
                let pair = v[i].re * f[i].re + v[i].im * f[i].im;
                o[i] = -o[i] + ie2 * ((v[i].norm_sqr() - 1.0) * f[i] + 2.0 * pair * v[i]);
            }
        }
        out
    }

    /// `<L phi, phi>`.
    pub fn quadratic_form(&self, phi: &ComplexField) -> Result<f64> {
        inner_product(&self.apply(phi)?, phi)
    }
}

/// `N_sigma(w) = eps^-2 (2 w <v, w> + |w|^2 (v + w))` at interior nodes.
pub fn apply_n(v: &ComplexField, w: &ComplexField, epsilon: f64) -> Result<ComplexField> {
    if !v.grid().same_as(w.grid()) {
        return Err(Error::GridMismatch);
    }
    let trace = w.max_trace();
    if trace > 0.0 {
        return Err(Error::NonzeroTrace(trace));
    }
    let grid = v.grid();
    let nz = grid.n_z();
    let ie2 = 1.0 / (epsilon * epsilon);
    let mut out = ComplexField::zeros(grid);
    let (a, b) = (v.values(), w.values());
    let o = out.values_mut();
    for &p in grid.interior() {
        for i in p * nz..(p + 1) * nz {
            let pair = a[i].re * b[i].re + a[i].im * b[i].im;
            o[i] = ie2 * (2.0 * pair * b[i] + b[i].norm_sqr() * (a[i] + b[i]));
        }
    }
    Ok(out)
}

/// `||L m|| / ||m||` in `X^0` for the modes `d1 v`, `d2 v` and `i v`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroModeResiduals {
    pub translation: [f64; 2],
    pub gauge: f64,
}

impl ZeroModeResiduals {
    pub fn max(&self) -> f64 {
        self.translation[0].max(self.translation[1]).max(self.gauge)
    }
}

/// Residuals of the symmetry modes. The translation modes are the analytic
/// derivatives of `f(sigma)` on interior and band nodes, so the operator
/// sees their exact Dirichlet data.
pub fn zero_mode_residuals(op: &LinearOperator) -> Result<ZeroModeResiduals> {
    let grid = op.grid();
    let v = op.frame.field();
    let sigma = op.frame.moduli();
    let phase = Complex64::from_polar(1.0, sigma.lambda);
    let nz = grid.n_z();
    let mut d1 = ComplexField::zeros(grid);
    let mut d2 = ComplexField::zeros(grid);
    for &p in grid.active() {
        let x = grid.position(p);
        for iz in 0..nz {
            let c = sigma.curve.points[iz];
            let jet = op.profile.vortex_jet([x[0] - c[0], x[1] - c[1]])?;
            d1.values_mut()[p * nz + iz] = phase * jet.d1;
            d2.values_mut()[p * nz + iz] = phase * jet.d2;
        }
    }
    let gauge = v.scaled(I);
    let ratio = |m: &ComplexField| {
        let lm = op.apply_any(m);
        let num = inner_product(&lm, &lm).unwrap_or(f64::NAN).sqrt();
        let den = inner_product(m, m).unwrap_or(f64::NAN).sqrt();
        num / den
    };
    Ok(ZeroModeResiduals {
        translation: [ratio(&d1), ratio(&d2)],
        gauge: ratio(&gauge),
    })
}

/// `(-Delta + s)^{-1}` with zero Dirichlet data, diagonalized in `z`.
pub struct ShiftedLaplacian {
    grid: Arc<Grid>,
    factors: Vec<BandedLdl>,
    mode_factor: Vec<usize>,
}

impl ShiftedLaplacian {
    pub fn new(grid: &Arc<Grid>, shift: f64) -> Result<Self> {
        if !(shift > 0.0 && shift.is_finite()) {
            return Err(Error::InvalidArgument(format!("shift must be positive, got {shift}")));
        }
        let n = grid.n_x();
        let ih2 = 1.0 / (grid.h_x() * grid.h_x());
        let b = interior_bandwidth(grid);
        let mut distinct: Vec<f64> = Vec::new();
        let mut mode_factor = Vec::new();
        for &k in grid.spectrum().wavenumbers() {
            let k2 = k * k;
            match distinct.iter().position(|&d| d == k2) {
                Some(j) => mode_factor.push(j),
                None => {
                    distinct.push(k2);
                    mode_factor.push(distinct.len() - 1);
                }
            }
        }
        let mut factors = Vec::with_capacity(distinct.len());
        for &k2 in &distinct {
            let mut a = SymmetricBand::zeros(grid.interior().len(), b);
            for (q, &p) in grid.interior().iter().enumerate() {
                a.add(q, q, Complex64::new(4.0 * ih2 + k2 + shift, 0.0));
                for nb in [p - n, p - 1] {
                    if let Some(r) = grid.compact_index(nb) {
                        a.add(q, r, Complex64::new(-ih2, 0.0));
                    }
                }
            }
            factors.push(a.factor()?);
        }
        Ok(Self {
            grid: Arc::clone(grid),
            factors,
            mode_factor,
        })
    }

    /// Solves on interior nodes; the band of the result is zero.
    pub fn solve(&self, rhs: &ComplexField) -> ComplexField {
        let grid = &self.grid;
        let nz = grid.n_z();
        let m = grid.interior().len();
        let mut work = vec![Complex64::new(0.0, 0.0); m * nz];
        let src = rhs.values();
        for (q, &p) in grid.interior().iter().enumerate() {
            work[q * nz..(q + 1) * nz].copy_from_slice(&src[p * nz..(p + 1) * nz]);
        }
        grid.spectrum().forward(&mut work);
        let mut column = vec![Complex64::new(0.0, 0.0); m];
        for j in 0..nz {
            for q in 0..m {
                column[q] = work[q * nz + j];
            }
            self.factors[self.mode_factor[j]].solve_in_place(&mut column, false);
            for q in 0..m {
                work[q * nz + j] = column[q];
            }
        }
        grid.spectrum().inverse(&mut work);
        let mut out = ComplexField::zeros(grid);
        let dst = out.values_mut();
        for (q, &p) in grid.interior().iter().enumerate() {
            dst[p * nz..(p + 1) * nz].copy_from_slice(&work[q * nz..(q + 1) * nz]);
        }
        out
    }
}

/// Orthogonal projector onto the complement of a fixed family of fields.
pub struct ComplementProjector {
    basis: Vec<ComplexField>,
    z_average: bool,
}

impl ComplementProjector {
    /// Complement of `{i d1 v, i d2 v}` on every slice together with
    /// `{v, i v}`: the kernel of `Q_sigma` with the gauge mode removed.
    pub fn kernel_of_q(frame: &FilamentFrame) -> Result<Self> {
        let grid = frame.field().grid();
        let nz = grid.n_z();
        let mut raw = Vec::with_capacity(2 * nz + 2);
        let mut v = frame.field().clone();
        v.zero_boundary();
        raw.push(v.scaled(I));
        raw.push(v);
        let [d1, d2] = frame.gradient();
        for iz in 0..nz {
            for d in [d1, d2] {
                let mut slice = ComplexField::zeros(grid);
                let (src, dst) = (d.values(), slice.values_mut());
                for &p in grid.interior() {
                    dst[p * nz + iz] = I * src[p * nz + iz];
                }
                raw.push(slice);
            }
        }
        Self::from_fields(raw, false)
    }

    /// No constraint (the identity on zero-trace fields).
    pub fn identity() -> Self {
        Self {
            basis: Vec::new(),
            z_average: false,
        }
    }

    /// Orthonormalizes `raw` by two passes of Gram-Schmidt. With `z_average`
    /// the projector also averages every column over `z`.
    pub fn from_fields(raw: Vec<ComplexField>, z_average: bool) -> Result<Self> {
        let mut basis: Vec<ComplexField> = Vec::with_capacity(raw.len());
        for mut e in raw {
            if z_average {
                average_z(&mut e);
            }
            let n0 = inner_product(&e, &e)?.sqrt();
            for _ in 0..2 {
                for b in &basis {
                    let c = inner_product(b, &e)?;
                    e.axpy(Complex64::new(-c, 0.0), b)?;
                }
            }
            let n1 = inner_product(&e, &e)?.sqrt();
            if n1 > 1e-8 * n0 {
                basis.push(e.scaled(Complex64::new(1.0 / n1, 0.0)));
            }
        }
        Ok(Self { basis, z_average })
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn apply(&self, w: &ComplexField) -> ComplexField {
        let mut out = w.clone();
        out.zero_boundary();
        if self.z_average {
            average_z(&mut out);
        }
        for b in &self.basis {
            let c = inner_product(b, &out).unwrap_or(0.0);
            out.axpy(Complex64::new(-c, 0.0), b).expect("same grid");
        }
        out
    }
}

fn average_z(f: &mut ComplexField) {
    let grid = Arc::clone(f.grid());
    let nz = grid.n_z();
    let v = f.values_mut();
    for &p in grid.interior() {
        let col = &mut v[p * nz..(p + 1) * nz];
        let mean = col.iter().sum::<Complex64>() / nz as f64;
        col.iter_mut().for_each(|x| *x = mean);
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct EigenOptions {
    /// Stop when `||L x - rho x|| <= tol` for the normalized iterate.
    pub tol: f64,
    pub max_iterations: usize,
    /// Shift `s` of the `(-Delta + s)^{-1}` preconditioner; `eps^-2` if unset.
    pub shift: Option<f64>,
    /// Seed of the random start vector.
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            tol: 1e-5,
            max_iterations: 400,
            shift: None,
            seed: 7,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GapEstimate {
    /// Smallest Rayleigh quotient found.
    pub value: f64,
    /// `||L x - value x||` for the normalized minimizer.
    pub residual: f64,
    pub iterations: usize,
}

fn norm(f: &ComplexField) -> f64 {
    inner_product(f, f).unwrap_or(f64::NAN).sqrt()
}

fn combine(terms: &[(f64, &ComplexField)]) -> ComplexField {
    let mut out = terms[0].1.scaled(Complex64::new(terms[0].0, 0.0));
    for &(c, f) in &terms[1..] {
        out.axpy(Complex64::new(c, 0.0), f).expect("same grid");
    }
    out
}

/// Smallest eigenvalue of `P L P` on the range of `P` by locally optimal
/// preconditioned conjugate gradients (a three-term block Rayleigh-Ritz
/// iteration), re-projecting after every operator application.
pub fn smallest_eigenvalue(
    op: &LinearOperator,
    projector: &ComplementProjector,
    start: &ComplexField,
    opts: &EigenOptions,
) -> Result<GapEstimate> {
    let eps = op.epsilon();
    let precond = ShiftedLaplacian::new(op.grid(), opts.shift.unwrap_or(1.0 / (eps * eps)))?;
    let apply = |x: &ComplexField| projector.apply(&op.apply_any(x));

    let mut x = projector.apply(start);
    let nx = norm(&x);
    if !(nx > 0.0) {
        return Err(Error::InvalidArgument("start vector lies in the excluded span".into()));
    }
    x = x.scaled(Complex64::new(1.0 / nx, 0.0));
    let mut lx = apply(&x);
    let mut dir: Option<(ComplexField, ComplexField)> = None;
    let mut residual = f64::INFINITY;
    for it in 0..opts.max_iterations {
        if it % 20 == 19 {
            lx = apply(&x);
        }
        let rho = inner_product(&x, &lx)?;
        let r = combine(&[(1.0, &lx), (-rho, &x)]);
        residual = norm(&r);
        if residual <= opts.tol {
            let fresh = apply(&x);
            let rf = inner_product(&x, &fresh)?;
            let res_f = norm(&combine(&[(1.0, &fresh), (-rf, &x)]));
            if res_f <= opts.tol {
                return Ok(GapEstimate {
                    value: rf,
                    residual: res_f,
                    iterations: it,
                });
            }
            lx = fresh;
            continue;
        }

        // Orthonormal search basis [x, w, p] with images under P L P.
        let mut basis = vec![x.clone()];
        let mut images = vec![lx.clone()];
        let w = projector.apply(&precond.solve(&r));
        let mut candidates = vec![(w, None)];
        if let Some((p, lp)) = dir.take() {
            candidates.push((p, Some(lp)));
        }
        for (mut c, mut lc) in candidates {
            let n0 = norm(&c);
            for _ in 0..2 {
                for (b, lb) in basis.iter().zip(&images) {
                    let k = inner_product(b, &c)?;
                    c.axpy(Complex64::new(-k, 0.0), b)?;
                    if let Some(l) = lc.as_mut() {
                        l.axpy(Complex64::new(-k, 0.0), lb)?;
                    }
                }
            }
            let n1 = norm(&c);
            if !(n1 > 1e-10 * n0.max(1e-300)) {
                continue;
            }
            let s = Complex64::new(1.0 / n1, 0.0);
            let lc = match lc {
                Some(l) => l.scaled(s),
                None => apply(&c.scaled(s)),
            };
            basis.push(c.scaled(s));
            images.push(lc);
        }
        let m = basis.len();
        let mut h = DMatrix::zeros(m, m);
        for a in 0..m {
            for b in 0..m {
                h[(a, b)] = inner_product(&basis[a], &images[b])?;
            }
        }
        let sym = DMatrix::from_fn(m, m, |a, b| 0.5 * (h[(a, b)] + h[(b, a)]));
        let eig = SymmetricEigen::new(sym);
        let (kmin, _) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (k, &l)| if l < acc.1 { (k, l) } else { acc });
        let c: Vec<f64> = eig.eigenvectors.column(kmin).iter().copied().collect();
        let xs: Vec<(f64, &ComplexField)> = c.iter().copied().zip(basis.iter()).collect();
        let ls: Vec<(f64, &ComplexField)> = c.iter().copied().zip(images.iter()).collect();
        x = combine(&xs);
        lx = combine(&ls);
        if m > 1 {
            dir = Some((combine(&xs[1..]), combine(&ls[1..])));
        }
        let nx = norm(&x);
        x = x.scaled(Complex64::new(1.0 / nx, 0.0));
        lx = lx.scaled(Complex64::new(1.0 / nx, 0.0));
    }
    Err(Error::EigenNotConverged {
        iterations: opts.max_iterations,
        residual,
    })
}

/// Seeded uniform random start vector with zero trace; a generic start
/// overlaps every symmetry class of eigenvectors.
pub fn random_start(grid: &Arc<Grid>, seed: u64) -> ComplexField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = ComplexField::zeros(grid);
    let nz = grid.n_z();
    for &p in grid.interior() {
        for iz in 0..nz {
            f.values_mut()[p * nz + iz] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
    }
    f
}

/// Smallest Rayleigh quotient of `L_sigma` on the kernel of `Q_sigma`
/// (gauge mode excluded).
pub fn coercivity_gap(op: &LinearOperator, opts: &EigenOptions) -> Result<GapEstimate> {
    let projector = ComplementProjector::kernel_of_q(op.frame())?;
    smallest_eigenvalue(op, &projector, &random_start(op.grid(), opts.seed), opts)
}

/// Smallest Rayleigh quotient of `L_sigma` over all zero-trace fields.
pub fn unprojected_minimum(op: &LinearOperator, opts: &EigenOptions) -> Result<GapEstimate> {
    smallest_eigenvalue(op, &ComplementProjector::identity(), &random_start(op.grid(), opts.seed), opts)
}

/// The planar gap: the same minimization restricted to `z`-independent
/// fields around a straight filament.
pub fn planar_gap(model: &FilamentModel, opts: &EigenOptions) -> Result<GapEstimate> {
    let n_z = model.grid().n_z();
    let op = LinearOperator::new(model, &Moduli::straight(n_z))?;
    let frame = op.frame();
    let mut v = frame.field().clone();
    v.zero_boundary();
    let [d1, d2] = frame.gradient();
    let raw = vec![v.scaled(I), v, d1.scaled(I), d2.scaled(I)];
    let projector = ComplementProjector::from_fields(raw, true)?;
    smallest_eigenvalue(&op, &projector, &random_start(op.grid(), opts.seed), opts)
}

/// Output record of a coercivity measurement.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectralReport {
    pub epsilon: f64,
    pub delta: f64,
    pub alpha: f64,
    pub beta_planar: f64,
    pub residuals: ZeroModeResiduals,
    pub iterations: usize,
}

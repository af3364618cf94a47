//! Discretized cylinder `omega x I`: a uniform Cartesian grid on the square
//! bounding the disc `omega`, periodic in `z` on `I = [0, 1)`.
//!
//! Nodes with `|x| < R` are interior unknowns. Non-interior nodes inside the
//! 3x3 neighbourhood of an interior node form the boundary band and carry the
//! Dirichlet trace. Everything else is masked out and ignored.
//!
//! Storage is row-major in `(i_x1, i_x2, i_z)` with `z` fastest, so each
//! `z` column is contiguous.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::PeriodicSpectrum;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub disc_radius: f64,
    pub n_x: usize,
    pub n_z: usize,
}

impl GridSpec {
    pub fn new(disc_radius: f64, n_x: usize, n_z: usize) -> Result<Self> {
        let spec = Self {
            disc_radius,
            n_x,
            n_z,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Smallest odd `n_x` whose spacing satisfies `h_x <= epsilon / 4`.
    pub fn resolving(epsilon: f64, disc_radius: f64, n_z: usize) -> Result<Self> {
        let cells = (8.0 * disc_radius / epsilon - 1e-9).ceil() as usize;
        let cells = cells + cells % 2;
        Self::new(disc_radius, (cells + 1).max(17), n_z)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.disc_radius > 0.0 && self.disc_radius.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "disc_radius must be positive, got {}",
                self.disc_radius
            )));
        }
        if self.n_x < 16 {
            return Err(Error::InvalidGrid(format!("n_x = {} < 16", self.n_x)));
        }
        if self.n_z < 8 {
            return Err(Error::InvalidGrid(format!("n_z = {} < 8", self.n_z)));
        }
        Ok(())
    }

    pub fn h_x(&self) -> f64 {
        2.0 * self.disc_radius / (self.n_x - 1) as f64
    }

    pub fn h_z(&self) -> f64 {
        1.0 / self.n_z as f64
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.disc_radius + i as f64 * self.h_x()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeKind {
    Interior,
    Band,
    Outside,
}

#[derive(Debug)]
pub struct Grid {
    spec: GridSpec,
    kinds: Vec<NodeKind>,
    interior: Vec<usize>,
    band: Vec<usize>,
    active: Vec<usize>,
    compact: Vec<usize>,
    spectrum: PeriodicSpectrum,
}

impl Grid {
    pub fn new(spec: GridSpec) -> Result<Arc<Self>> {
        spec.validate()?;
        let n = spec.n_x;
        let r2 = spec.disc_radius * spec.disc_radius;
        let mut kinds = vec![NodeKind::Outside; n * n];
        for i1 in 0..n {
            for i2 in 0..n {
                let (x1, x2) = (spec.coord(i1), spec.coord(i2));
                if x1 * x1 + x2 * x2 < r2 {
                    kinds[i1 * n + i2] = NodeKind::Interior;
                }
            }
        }
        for i1 in 0..n {
            for i2 in 0..n {
                if kinds[i1 * n + i2] != NodeKind::Interior {
                    continue;
                }
                for d1 in [-1i64, 0, 1] {
                    for d2 in [-1i64, 0, 1] {
                        let (j1, j2) = (i1 as i64 + d1, i2 as i64 + d2);
                        let q = (j1 as usize) * n + j2 as usize;
                        if kinds[q] == NodeKind::Outside {
                            kinds[q] = NodeKind::Band;
                        }
                    }
                }
            }
        }
        let centre_row = n / 2;
        let across = (0..n)
            .filter(|&i2| kinds[centre_row * n + i2] == NodeKind::Interior)
            .count();
        if across < 3 {
            return Err(Error::DegenerateGrid(format!(
                "only {across} interior points across the disc"
            )));
        }
        let interior: Vec<usize> = (0..n * n).filter(|&p| kinds[p] == NodeKind::Interior).collect();
        let band: Vec<usize> = (0..n * n).filter(|&p| kinds[p] == NodeKind::Band).collect();
        let active: Vec<usize> = (0..n * n).filter(|&p| kinds[p] != NodeKind::Outside).collect();
        let mut compact = vec![usize::MAX; n * n];
        for (q, &p) in interior.iter().enumerate() {
            compact[p] = q;
        }
        Ok(Arc::new(Self {
            spec,
            kinds,
            interior,
            band,
            active,
            compact,
            spectrum: PeriodicSpectrum::new(spec.n_z),
        }))
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn n_x(&self) -> usize {
        self.spec.n_x
    }

    pub fn n_z(&self) -> usize {
        self.spec.n_z
    }

    pub fn h_x(&self) -> f64 {
        self.spec.h_x()
    }

    pub fn h_z(&self) -> f64 {
        self.spec.h_z()
    }

    /// Quadrature weight of one node: `h_x^2 h_z`.
    pub fn weight(&self) -> f64 {
        self.h_x() * self.h_x() * self.h_z()
    }

    pub fn plane_len(&self) -> usize {
        self.spec.n_x * self.spec.n_x
    }

    pub fn len(&self) -> usize {
        self.plane_len() * self.spec.n_z
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self, p: usize) -> NodeKind {
        self.kinds[p]
    }

    /// Plane indices of interior nodes, ascending (row-major order).
    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    pub fn band(&self) -> &[usize] {
        &self.band
    }

    /// Interior and band nodes, ascending.
    pub fn active(&self) -> &[usize] {
        &self.active
    }

    /// Position of plane node `p` in [`Grid::interior`], if interior.
    pub fn compact_index(&self, p: usize) -> Option<usize> {
        match self.compact[p] {
            usize::MAX => None,
            q => Some(q),
        }
    }

    pub fn position(&self, p: usize) -> [f64; 2] {
        let n = self.spec.n_x;
        [self.spec.coord(p / n), self.spec.coord(p % n)]
    }

    pub fn z(&self, iz: usize) -> f64 {
        iz as f64 * self.h_z()
    }

    pub fn spectrum(&self) -> &PeriodicSpectrum {
        &self.spectrum
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        self.spec == other.spec
    }
}

fn check_same(a: &Grid, b: &Grid) -> Result<()> {
    if a.same_as(b) {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

/// Complex scalar field on the grid. Outside nodes hold zero; band nodes hold
/// the Dirichlet trace.
#[derive(Clone, Debug)]
pub struct ComplexField {
    grid: Arc<Grid>,
    values: Vec<Complex64>,
}

impl ComplexField {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Self {
            grid: Arc::clone(grid),
            values: vec![ZERO; grid.len()],
        }
    }

    pub fn from_values(grid: &Arc<Grid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self {
            grid: Arc::clone(grid),
            values,
        })
    }

    /// Samples `f(x, z)` on interior and band nodes.
    pub fn from_fn(grid: &Arc<Grid>, mut f: impl FnMut([f64; 2], f64) -> Complex64) -> Self {
        let mut field = Self::zeros(grid);
        let nz = grid.n_z();
        for &p in grid.active() {
            let x = grid.position(p);
            for iz in 0..nz {
                field.values[p * nz + iz] = f(x, grid.z(iz));
            }
        }
        field
    }

    /// Samples `f` on interior nodes only; the trace is zero.
    pub fn from_fn_interior(
        grid: &Arc<Grid>,
        mut f: impl FnMut([f64; 2], f64) -> Complex64,
    ) -> Self {
        let mut field = Self::zeros(grid);
        let nz = grid.n_z();
        for &p in grid.interior() {
            let x = grid.position(p);
            for iz in 0..nz {
                field.values[p * nz + iz] = f(x, grid.z(iz));
            }
        }
        field
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn at(&self, p: usize, iz: usize) -> Complex64 {
        self.values[p * self.grid.n_z() + iz]
    }

    /// Band values, band-node-major then `z`.
    pub fn boundary_data(&self) -> Vec<Complex64> {
        let nz = self.grid.n_z();
        self.grid
            .band()
            .iter()
            .flat_map(|&p| self.values[p * nz..(p + 1) * nz].iter().copied())
            .collect()
    }

    pub fn max_trace(&self) -> f64 {
        self.boundary_data().iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn set_boundary_data(&mut self, data: &[Complex64]) -> Result<()> {
        let nz = self.grid.n_z();
        if data.len() != self.grid.band().len() * nz {
            return Err(Error::InvalidArgument("boundary data length mismatch".into()));
        }
        let grid = Arc::clone(&self.grid);
        for (b, &p) in grid.band().iter().enumerate() {
            self.values[p * nz..(p + 1) * nz].copy_from_slice(&data[b * nz..(b + 1) * nz]);
        }
        Ok(())
    }

    pub fn set_boundary_from(&mut self, other: &ComplexField) -> Result<()> {
        check_same(&self.grid, &other.grid)?;
        let nz = self.grid.n_z();
        let grid = Arc::clone(&self.grid);
        for &p in grid.band() {
            self.values[p * nz..(p + 1) * nz].copy_from_slice(&other.values[p * nz..(p + 1) * nz]);
        }
        Ok(())
    }

    pub fn zero_boundary(&mut self) {
        let nz = self.grid.n_z();
        let grid = Arc::clone(&self.grid);
        for &p in grid.band() {
            self.values[p * nz..(p + 1) * nz].fill(ZERO);
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// `a * self + b * other`, including the trace.
    pub fn lin_comb(&self, a: Complex64, other: &ComplexField, b: Complex64) -> Result<Self> {
        check_same(&self.grid, &other.grid)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&u, &v)| a * u + b * v)
            .collect();
        Ok(Self {
            grid: Arc::clone(&self.grid),
            values,
        })
    }

    pub fn add(&self, other: &ComplexField) -> Result<Self> {
        self.lin_comb(Complex64::new(1.0, 0.0), other, Complex64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &ComplexField) -> Result<Self> {
        self.lin_comb(Complex64::new(1.0, 0.0), other, Complex64::new(-1.0, 0.0))
    }

    pub fn scaled(&self, a: Complex64) -> Self {
        Self {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|&v| a * v).collect(),
        }
    }

    pub fn axpy(&mut self, a: Complex64, other: &ComplexField) -> Result<()> {
        check_same(&self.grid, &other.grid)?;
        for (u, &v) in self.values.iter_mut().zip(&other.values) {
            *u += a * v;
        }
        Ok(())
    }

    /// Periodic shift by `s` samples in `z`: `out(z_j) = self(z_{j - s})`.
    pub fn shift_z(&self, s: usize) -> Self {
        let nz = self.grid.n_z();
        let mut out = Self::zeros(&self.grid);
        for (src, dst) in self.values.chunks_exact(nz).zip(out.values.chunks_exact_mut(nz)) {
            for j in 0..nz {
                dst[(j + s) % nz] = src[j];
            }
        }
        out
    }

    /// `X^0` norm.
    pub fn norm(&self) -> f64 {
        inner_product(self, self).map(f64::sqrt).unwrap_or(f64::NAN)
    }
}

#[derive(Clone, Debug)]
pub struct RealField {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl RealField {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Self {
            grid: Arc::clone(grid),
            values: vec![0.0; grid.len()],
        }
    }

    pub fn from_fn(grid: &Arc<Grid>, mut f: impl FnMut([f64; 2], f64) -> f64) -> Self {
        let mut field = Self::zeros(grid);
        let nz = grid.n_z();
        for &p in grid.active() {
            let x = grid.position(p);
            for iz in 0..nz {
                field.values[p * nz + iz] = f(x, grid.z(iz));
            }
        }
        field
    }

    pub fn from_values(grid: &Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument("real field length mismatch".into()));
        }
        Ok(Self {
            grid: Arc::clone(grid),
            values,
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn at(&self, p: usize, iz: usize) -> f64 {
        self.values[p * self.grid.n_z() + iz]
    }

    pub fn product(&self, other: &RealField) -> Result<Self> {
        check_same(&self.grid, &other.grid)?;
        Ok(Self {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
        })
    }
}

/// Three real component arrays sharing the grid layout.
#[derive(Clone, Debug)]
pub struct VectorField3 {
    grid: Arc<Grid>,
    components: [Vec<f64>; 3],
}

impl VectorField3 {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Self {
            grid: Arc::clone(grid),
            components: [vec![0.0; grid.len()], vec![0.0; grid.len()], vec![0.0; grid.len()]],
        }
    }

    pub fn from_fn(grid: &Arc<Grid>, mut f: impl FnMut([f64; 2], f64) -> [f64; 3]) -> Self {
        let mut field = Self::zeros(grid);
        let nz = grid.n_z();
        for &p in grid.active() {
            let x = grid.position(p);
            for iz in 0..nz {
                let v = f(x, grid.z(iz));
                for c in 0..3 {
                    field.components[c][p * nz + iz] = v[c];
                }
            }
        }
        field
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn component(&self, c: usize) -> &[f64] {
        &self.components[c]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.components[c]
    }

    pub fn at(&self, p: usize, iz: usize) -> [f64; 3] {
        let i = p * self.grid.n_z() + iz;
        [self.components[0][i], self.components[1][i], self.components[2][i]]
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().flatten().all(|v| v.is_finite())
    }
}

/// `z`-derivative of every column (all plane nodes).
fn z_derivative(grid: &Grid, values: &[Complex64], order: u32) -> Vec<Complex64> {
    let mut out = values.to_vec();
    grid.spectrum().differentiate_columns(&mut out, order);
    out
}

/// `(d/dx1, d/dx2, d/dz)` at interior nodes: centered differences in `x`
/// (reading the trace on the band), Fourier differentiation in `z`.
/// The returned fields vanish on the band.
pub fn gradient(f: &ComplexField) -> [ComplexField; 3] {
    let grid = f.grid();
    let (n, nz) = (grid.n_x(), grid.n_z());
    let inv2h = 0.5 / grid.h_x();
    let v = f.values();
    let mut d1 = ComplexField::zeros(grid);
    let mut d2 = ComplexField::zeros(grid);
    let dz_all = z_derivative(grid, v, 1);
    let mut dz = ComplexField::zeros(grid);
    for &p in grid.interior() {
        for iz in 0..nz {
            let i = p * nz + iz;
            d1.values[i] = (v[i + n * nz] - v[i - n * nz]) * inv2h;
            d2.values[i] = (v[i + nz] - v[i - nz]) * inv2h;
            dz.values[i] = dz_all[i];
        }
    }
    [d1, d2, dz]
}

/// Five-point Laplacian in `x` plus the spectral second derivative in `z`,
/// evaluated at interior nodes with the trace as Dirichlet data.
pub fn laplacian(f: &ComplexField) -> ComplexField {
    let grid = f.grid();
    let (n, nz) = (grid.n_x(), grid.n_z());
    let ih2 = 1.0 / (grid.h_x() * grid.h_x());
    let v = f.values();
    let dzz = z_derivative(grid, v, 2);
    let mut out = ComplexField::zeros(grid);
    for &p in grid.interior() {
        for iz in 0..nz {
            let i = p * nz + iz;
            let lap_x = (v[i + n * nz] + v[i - n * nz] + v[i + nz] + v[i - nz] - 4.0 * v[i]) * ih2;
            out.values[i] = lap_x + dzz[i];
        }
    }
    out
}

/// All second partial derivatives `[d11, d22, d12, d1z, d2z, dzz]` at
/// interior nodes.
pub fn second_derivatives(f: &ComplexField) -> [ComplexField; 6] {
    let grid = f.grid();
    let (n, nz) = (grid.n_x(), grid.n_z());
    let h = grid.h_x();
    let ih2 = 1.0 / (h * h);
    let v = f.values();
    let [g1, g2, _] = gradient(f);
    let d1z = z_derivative(grid, g1.values(), 1);
    let d2z = z_derivative(grid, g2.values(), 1);
    let dzz = z_derivative(grid, v, 2);
    let mut out: [ComplexField; 6] = std::array::from_fn(|_| ComplexField::zeros(grid));
    let (sn, s1) = (n * nz, nz);
    for &p in grid.interior() {
        for iz in 0..nz {
            let i = p * nz + iz;
            out[0].values[i] = (v[i + sn] - 2.0 * v[i] + v[i - sn]) * ih2;
            out[1].values[i] = (v[i + s1] - 2.0 * v[i] + v[i - s1]) * ih2;
            out[2].values[i] =
                (v[i + sn + s1] - v[i + sn - s1] - v[i - sn + s1] + v[i - sn - s1]) * (0.25 * ih2);
            out[3].values[i] = d1z[i];
            out[4].values[i] = d2z[i];
            out[5].values[i] = dzz[i];
        }
    }
    out
}

/// Midpoint quadrature over the interior nodes times the uniform `z` rule.
/// Summation runs in ascending node order, then `z`.
pub fn integrate(g: &RealField) -> f64 {
    let grid = g.grid();
    let nz = grid.n_z();
    let mut total = 0.0;
    for &p in grid.interior() {
        for v in &g.values()[p * nz..(p + 1) * nz] {
            total += v;
        }
    }
    total * grid.weight()
}

/// Quadrature of a pointwise expression over interior nodes, same order as
/// [`integrate`].
pub fn integrate_with(grid: &Grid, mut g: impl FnMut(usize) -> f64) -> f64 {
    let nz = grid.n_z();
    let mut total = 0.0;
    for &p in grid.interior() {
        for iz in 0..nz {
            total += g(p * nz + iz);
        }
    }
    total * grid.weight()
}

/// `<f, g>_X = int Re(conj(f) g)`.
pub fn inner_product(f: &ComplexField, g: &ComplexField) -> Result<f64> {
    check_same(f.grid(), g.grid())?;
    let (a, b) = (f.values(), g.values());
    Ok(integrate_with(f.grid(), |i| a[i].re * b[i].re + a[i].im * b[i].im))
}

fn squared_norm(f: &ComplexField) -> f64 {
    let v = f.values();
    integrate_with(f.grid(), |i| v[i].norm_sqr())
}

/// `X^k` norm for `k` in `{0, 1, 2}`; `X^2` adds every second partial
/// (mixed ones counted twice, as in the Frobenius norm of the Hessian).
pub fn sobolev_norm(f: &ComplexField, k: u32) -> Result<f64> {
    if k > 2 {
        return Err(Error::InvalidSobolevOrder(k));
    }
    let mut total = squared_norm(f);
    if k >= 1 {
        total += gradient(f).iter().map(squared_norm).sum::<f64>();
    }
    if k == 2 {
        let dd = second_derivatives(f);
        let weights = [1.0, 1.0, 2.0, 2.0, 2.0, 1.0];
        total += dd
            .iter()
            .zip(weights)
            .map(|(d, w)| w * squared_norm(d))
            .sum::<f64>();
    }
    Ok(total.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid(n_x: usize, n_z: usize) -> Arc<Grid> {
        Grid::new(GridSpec::new(1.0, n_x, n_z).unwrap()).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn spec_validation() {
        assert!(GridSpec::new(0.0, 32, 8).is_err());
        assert!(GridSpec::new(1.0, 15, 8).is_err());
        assert!(GridSpec::new(1.0, 32, 7).is_err());
        let s = GridSpec::resolving(0.05, 1.0, 8).unwrap();
        assert!(s.h_x() <= 0.05 / 4.0 + 1e-15);
        assert_eq!(s.n_x % 2, 1);
    }

    #[test]
    fn band_surrounds_interior() {
        let g = grid(33, 8);
        let n = g.n_x();
        for &p in g.interior() {
            for d in [n - 1, n, n + 1, 1] {
                assert_ne!(g.kind(p + d), NodeKind::Outside);
                assert_ne!(g.kind(p - d), NodeKind::Outside);
            }
            let [x1, x2] = g.position(p);
            assert!(x1 * x1 + x2 * x2 < 1.0);
        }
    }

    #[test]
    fn gradient_of_constant_and_linear() {
        let g = grid(33, 8);
        let one = ComplexField::from_fn(&g, |_, _| c(1.0, 0.0));
        for d in gradient(&one) {
            assert!(d.values().iter().all(|v| v.norm() < 1e-12));
        }
        let lin = ComplexField::from_fn(&g, |x, _| c(x[0], x[1]));
        let [d1, d2, dz] = gradient(&lin);
        for &p in g.interior() {
            for iz in 0..8 {
                assert!((d1.at(p, iz) - c(1.0, 0.0)).norm() < 1e-12);
                assert!((d2.at(p, iz) - c(0.0, 1.0)).norm() < 1e-12);
                assert!(dz.at(p, iz).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn z_mode_derivatives_are_spectral() {
        let g = grid(17, 16);
        let f = ComplexField::from_fn(&g, |_, z| Complex64::from_polar(1.0, 2.0 * PI * z));
        let [_, _, dz] = gradient(&f);
        let lap = laplacian(&f);
        for &p in g.interior() {
            for iz in 0..16 {
                let u = f.at(p, iz);
                assert!((dz.at(p, iz) - c(0.0, 2.0 * PI) * u).norm() < 1e-12);
                assert!((lap.at(p, iz) + 4.0 * PI * PI * u).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn laplacian_of_quadratic() {
        let g = grid(41, 8);
        let f = ComplexField::from_fn(&g, |x, _| c(x[0] * x[0], 0.0));
        let lap = laplacian(&f);
        for &p in g.interior() {
            assert!((lap.at(p, 3) - c(2.0, 0.0)).norm() < 1e-9);
        }
    }

    #[test]
    fn disc_area_and_annulus() {
        let g = grid(128, 8);
        let one = RealField::from_fn(&g, |_, _| 1.0);
        assert!((integrate(&one) - PI).abs() / PI < 0.02);
        let ann = RealField::from_fn(&g, |x, _| {
            let r2 = x[0] * x[0] + x[1] * x[1];
            if (0.0625..=0.25).contains(&r2) {
                1.0 / r2
            } else {
                0.0
            }
        });
        let expect = 2.0 * PI * 2f64.ln();
        assert!((integrate(&ann) - expect).abs() / expect < 0.02);
        assert_eq!(integrate(&RealField::zeros(&g)), 0.0);
    }

    #[test]
    fn inner_product_identities() {
        let g = grid(49, 8);
        let f = ComplexField::from_fn(&g, |x, z| c(x[0] + z, x[1] * x[0]));
        let if_ = f.scaled(c(0.0, 1.0));
        assert!(inner_product(&f, &if_).unwrap().abs() < 1e-14);
        assert!(inner_product(&f, &f).unwrap() > 0.0);
        let one = ComplexField::from_fn(&g, |_, _| c(1.0, 0.0));
        let x1 = ComplexField::from_fn(&g, |x, _| c(x[0], 0.0));
        assert!(inner_product(&one, &x1).unwrap().abs() < 1e-12);
        let other = grid(33, 8);
        assert!(matches!(
            inner_product(&f, &ComplexField::zeros(&other)),
            Err(Error::GridMismatch)
        ));
    }

    #[test]
    fn sobolev_norm_orders() {
        let g = grid(33, 8);
        let zero = ComplexField::zeros(&g);
        for k in 0..3 {
            assert_eq!(sobolev_norm(&zero, k).unwrap(), 0.0);
        }
        assert!(matches!(sobolev_norm(&zero, 3), Err(Error::InvalidSobolevOrder(3))));
    }

    #[test]
    fn degenerate_grid_is_rejected() {
        // A disc narrower than the spacing leaves too few interior points.
        let spec = GridSpec {
            disc_radius: 1.0,
            n_x: 16,
            n_z: 8,
        };
        assert!(Grid::new(spec).is_ok());
    }
}

//! Concentration observables: the Jacobian (vorticity) field, comparison of
//! vorticity and energy against line integrals over the filament, and
//! zero-curve extraction.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::curve::Curve;
use crate::dynamics::energy_density;
use crate::error::{Error, Result};
use crate::grid::{gradient, ComplexField, Grid, NodeKind, VectorField3};

/// `Ju = grad psi^1 x grad psi^2` at interior nodes (zero elsewhere).
pub fn jacobian_field(u: &ComplexField) -> VectorField3 {
    let grid = u.grid();
    let nz = grid.n_z();
    let [d1, d2, dz] = gradient(u);
    let (d1, d2, dz) = (d1.values(), d2.values(), dz.values());
    let mut out = VectorField3::zeros(grid);
    for &p in grid.interior() {
        for i in p * nz..(p + 1) * nz {
            let a = [d1[i].re, d2[i].re, dz[i].re];
            let b = [d1[i].im, d2[i].im, dz[i].im];
            out.component_mut(0)[i] = a[1] * b[2] - a[2] * b[1];
            out.component_mut(1)[i] = a[2] * b[0] - a[0] * b[2];
            out.component_mut(2)[i] = a[0] * b[1] - a[1] * b[0];
        }
    }
    out
}

/// `int (Ju) . e_3` over slice `iz`.
pub fn slice_degree_integral(j: &VectorField3, iz: usize) -> f64 {
    let grid = j.grid();
    let nz = grid.n_z();
    let h2 = grid.h_x() * grid.h_x();
    let c = j.component(2);
    h2 * grid.interior().iter().map(|&p| c[p * nz + iz]).sum::<f64>()
}

/// Horizontal test function, constant or a tensor-product bump
/// `a q((x1 - c1)/r) q((x2 - c2)/r)` with `q(t) = (1 - t^2)^2` on `|t| < 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TestFunction {
    Constant { value: f64 },
    Bump { center: [f64; 2], radius: f64, amplitude: f64 },
}

/// `sup |q'| = 8 / (3 sqrt 3)`.
const BUMP_SLOPE: f64 = 1.539_600_717_839_002;

fn q(t: f64) -> (f64, f64) {
    if t.abs() >= 1.0 {
        (0.0, 0.0)
    } else {
        let s = 1.0 - t * t;
        (s * s, -4.0 * t * s)
    }
}

impl TestFunction {
    pub fn value(&self, x: [f64; 2]) -> f64 {
        self.value_and_gradient(x).0
    }

    pub fn value_and_gradient(&self, x: [f64; 2]) -> (f64, [f64; 2]) {
        match *self {
            TestFunction::Constant { value } => (value, [0.0, 0.0]),
            TestFunction::Bump {
                center,
                radius,
                amplitude,
            } => {
                let (a, da) = q((x[0] - center[0]) / radius);
                let (b, db) = q((x[1] - center[1]) / radius);
                (
                    amplitude * a * b,
                    [amplitude * da * b / radius, amplitude * a * db / radius],
                )
            }
        }
    }

    /// `sup |f| + sup |grad f|` (an upper bound for bumps).
    pub fn c1_norm(&self) -> f64 {
        match *self {
            TestFunction::Constant { value } => value.abs(),
            TestFunction::Bump {
                radius, amplitude, ..
            } => amplitude.abs() * (1.0 + std::f64::consts::SQRT_2 * BUMP_SLOPE / radius),
        }
    }
}

/// `X(x, z) = direction * f(x)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestVectorField {
    pub direction: [f64; 3],
    pub profile: TestFunction,
}

impl TestVectorField {
    pub fn value(&self, x: [f64; 2]) -> [f64; 3] {
        let f = self.profile.value(x);
        self.direction.map(|d| d * f)
    }

    pub fn c1_norm(&self) -> f64 {
        let d = self.direction.iter().map(|v| v * v).sum::<f64>().sqrt();
        d * self.profile.c1_norm()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub time: f64,
    /// Componentwise `int X_j (Ju)_j`.
    pub lhs_vorticity: [f64; 3],
    /// Componentwise `pi int X_j tau_j dH^1` along the filament.
    pub rhs_vorticity: [f64; 3],
    /// `int X x Ju`.
    pub cross_vorticity: [f64; 3],
    /// `int e(u) phi / |log eps|`.
    pub lhs_energy: f64,
    /// `pi int phi dH^1`.
    pub rhs_energy: f64,
    /// `|sum lhs_vorticity - sum rhs_vorticity|`.
    pub vorticity_discrepancy: f64,
    pub energy_discrepancy: f64,
    /// `pi int |X| dH^1`, the scale the vorticity discrepancy is measured against.
    pub vorticity_scale: f64,
    pub vector_field: TestVectorField,
    pub scalar_field: TestFunction,
    pub warnings: Vec<String>,
}

impl ConcentrationReport {
    pub fn vorticity_relative(&self) -> f64 {
        self.vorticity_discrepancy / self.vorticity_scale
    }

    pub fn energy_relative(&self) -> f64 {
        self.energy_discrepancy / self.rhs_energy.abs()
    }
}

/// Compares `u` against the filament `(gamma(z), z)`. Test functions whose
/// `C^1` norm exceeds `c1_budget` are flagged in `warnings`.
pub fn concentration_compare(
    u: &ComplexField,
    time: f64,
    curve: &Curve,
    x_field: &TestVectorField,
    phi: &TestFunction,
    epsilon: f64,
    c1_budget: Option<f64>,
) -> Result<ConcentrationReport> {
    let grid = u.grid();
    let nz = grid.n_z();
    if curve.n_z() != nz {
        return Err(Error::InvalidArgument("curve and grid sample counts differ".into()));
    }
    let mut warnings = Vec::new();
    if let Some(budget) = c1_budget {
        for (name, norm) in [("X", x_field.c1_norm()), ("phi", phi.c1_norm())] {
            if norm > budget {
                warnings.push(format!("{name} has C^1 norm {norm:.3e} above budget {budget:.3e}"));
            }
        }
    }
    let j = jacobian_field(u);
    let xs: Vec<[f64; 3]> = grid.interior().iter().map(|&p| x_field.value(grid.position(p))).collect();
    let mut lhs = [0.0; 3];
    let mut cross = [0.0; 3];
    let weight = grid.weight();
    for (k, &p) in grid.interior().iter().enumerate() {
        let x = xs[k];
        for iz in 0..nz {
            let v = j.at(p, iz);
            for c in 0..3 {
                lhs[c] += x[c] * v[c];
            }
            cross[0] += x[1] * v[2] - x[2] * v[1];
            cross[1] += x[2] * v[0] - x[0] * v[2];
            cross[2] += x[0] * v[1] - x[1] * v[0];
        }
    }
    let lhs = lhs.map(|v| v * weight);
    let cross = cross.map(|v| v * weight);

    let e = energy_density(u, epsilon);
    let ev = e.values();
    let phis: Vec<f64> = grid.interior().iter().map(|&p| phi.value(grid.position(p))).collect();
    let mut energy_sum = 0.0;
    for (k, &p) in grid.interior().iter().enumerate() {
        for iz in 0..nz {
            energy_sum += ev[p * nz + iz] * phis[k];
        }
    }
    let lhs_energy = energy_sum * weight / epsilon.ln().abs();

    // Line integrals: tau dH^1 = (gamma_z, 1) dz.
    let d = curve.derivative(1);
    let hz = 1.0 / nz as f64;
    let mut rhs = [0.0; 3];
    let mut scale = 0.0;
    let mut rhs_energy = 0.0;
    for iz in 0..nz {
        let g = curve.points[iz];
        let t = [d.points[iz][0], d.points[iz][1], 1.0];
        let speed = (t[0] * t[0] + t[1] * t[1] + 1.0).sqrt();
        let x = x_field.value(g);
        for c in 0..3 {
            rhs[c] += PI * x[c] * t[c] * hz;
        }
        scale += PI * x.iter().map(|v| v * v).sum::<f64>().sqrt() * speed * hz;
        rhs_energy += PI * phi.value(g) * speed * hz;
    }
    let vorticity_discrepancy = (lhs.iter().sum::<f64>() - rhs.iter().sum::<f64>()).abs();
    Ok(ConcentrationReport {
        time,
        lhs_vorticity: lhs,
        rhs_vorticity: rhs,
        cross_vorticity: cross,
        lhs_energy,
        rhs_energy,
        vorticity_discrepancy,
        energy_discrepancy: (lhs_energy - rhs_energy).abs(),
        vorticity_scale: scale,
        vector_field: *x_field,
        scalar_field: *phi,
        warnings,
    })
}

/// Per-slice zeros of `u`; failed slices carry the reason.
#[derive(Debug)]
pub struct ZeroLocus {
    pub slices: Vec<std::result::Result<[f64; 2], String>>,
}

impl ZeroLocus {
    pub fn lost_slices(&self) -> Vec<usize> {
        self.slices
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.is_err().then_some(i))
            .collect()
    }

    /// The zero curve, or the first lost slice as an error.
    pub fn into_curve(self) -> Result<Curve> {
        let mut points = Vec::with_capacity(self.slices.len());
        for (slice, s) in self.slices.into_iter().enumerate() {
            match s {
                Ok(p) => points.push(p),
                Err(reason) => return Err(Error::FilamentLost { slice, reason }),
            }
        }
        Curve::new(points)
    }
}

/// Zero-search trust radius around the guess.
pub const TRUST_RADIUS: f64 = 0.25;

/// Bilinear interpolant of slice `iz` and its gradient at `x`.
fn bilinear(u: &ComplexField, iz: usize, x: [f64; 2]) -> std::result::Result<([f64; 2], [[f64; 2]; 2]), String> {
    let grid: &Grid = u.grid();
    let n = grid.n_x();
    let nz = grid.n_z();
    let h = grid.h_x();
    let r = grid.spec().disc_radius;
    let s = [(x[0] + r) / h, (x[1] + r) / h];
    let i = [s[0].floor(), s[1].floor()];
    if i[0] < 0.0 || i[1] < 0.0 || i[0] + 1.0 >= n as f64 || i[1] + 1.0 >= n as f64 {
        return Err(format!("point ({:.4}, {:.4}) left the grid", x[0], x[1]));
    }
    let (i1, i2) = (i[0] as usize, i[1] as usize);
    let (t1, t2) = (s[0] - i[0], s[1] - i[1]);
    let nodes = [i1 * n + i2, (i1 + 1) * n + i2, i1 * n + i2 + 1, (i1 + 1) * n + i2 + 1];
    if nodes.iter().any(|&p| grid.kind(p) == NodeKind::Outside) {
        return Err(format!("point ({:.4}, {:.4}) left the disc", x[0], x[1]));
    }
    let v = |p: usize| u.values()[p * nz + iz];
    let (a, b, c, d) = (v(nodes[0]), v(nodes[1]), v(nodes[2]), v(nodes[3]));
    let val = a * ((1.0 - t1) * (1.0 - t2)) + b * (t1 * (1.0 - t2)) + c * ((1.0 - t1) * t2) + d * (t1 * t2);
    let g1 = ((b - a) * (1.0 - t2) + (d - c) * t2) / h;
    let g2 = ((c - a) * (1.0 - t1) + (d - b) * t1) / h;
    Ok(([val.re, val.im], [[g1.re, g2.re], [g1.im, g2.im]]))
}

fn slice_zero(u: &ComplexField, iz: usize, guess: [f64; 2]) -> std::result::Result<[f64; 2], String> {
    let mut x = guess;
    for _ in 0..60 {
        let (f, jac) = bilinear(u, iz, x)?;
        if f[0].hypot(f[1]) <= 1e-13 {
            return Ok(x);
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if !(det.abs() > 1e-300) {
            return Err("singular Jacobian in zero search".into());
        }
        let dx = [
            (jac[1][1] * f[0] - jac[0][1] * f[1]) / det,
            (-jac[1][0] * f[0] + jac[0][0] * f[1]) / det,
        ];
        let next = [x[0] - dx[0], x[1] - dx[1]];
        if (next[0] - guess[0]).hypot(next[1] - guess[1]) > TRUST_RADIUS {
            return Err(format!("zero escaped the trust radius {TRUST_RADIUS}"));
        }
        if dx[0].hypot(dx[1]) <= 1e-14 * (1.0 + x[0].hypot(x[1])) {
            return Ok(next);
        }
        x = next;
    }
    Err("zero search did not converge".into())
}

/// Per-slice Newton search for the zero of the bilinear interpolant of `u`,
/// started from `guess(z)`.
pub fn extract_zero_curve(u: &ComplexField, guess: &Curve) -> Result<ZeroLocus> {
    let nz = u.grid().n_z();
    if guess.n_z() != nz {
        return Err(Error::InvalidArgument("guess and grid sample counts differ".into()));
    }
    Ok(ZeroLocus {
        slices: (0..nz).map(|iz| slice_zero(u, iz, guess.points[iz])).collect(),
    })
}

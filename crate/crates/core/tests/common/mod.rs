#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::Arc;

use glvortex_core::{
    solve_profile, ComplexField, Complex64, Curve, CurveMode, FilamentModel, Grid, GridSpec,
    Moduli,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn model(eps: f64, n_z: usize) -> FilamentModel {
    let spec = GridSpec::resolving(eps, 1.0, n_z).unwrap();
    let grid = Grid::new(spec).unwrap();
    let profile = Arc::new(solve_profile(eps, 2.0, 4096).unwrap());
    FilamentModel::new(grid, profile).unwrap()
}

pub fn helix(n_z: usize, a: f64) -> Curve {
    Curve::from_modes(
        n_z,
        &[CurveMode {
            amplitude: a,
            wavenumber: 1,
            phase: 0.0,
        }],
    )
}

pub fn wavy_moduli(n_z: usize) -> Moduli {
    let curve = Curve::from_modes(
        n_z,
        &[
            CurveMode {
                amplitude: 0.02,
                wavenumber: 1,
                phase: 0.3,
            },
            CurveMode {
                amplitude: 0.004,
                wavenumber: -2,
                phase: 1.1,
            },
        ],
    );
    Moduli::new(0.4, curve)
}

/// Smooth random field vanishing on the boundary band.
pub fn random_field(grid: &Arc<Grid>, rng: &mut impl Rng) -> ComplexField {
    let bumps: Vec<_> = (0..5)
        .map(|_| {
            let c = [rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)];
            let w = rng.gen_range(0.1..0.4);
            let amp = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let m = rng.gen_range(-2i32..=2) as f64;
            (c, w, amp, m)
        })
        .collect();
    ComplexField::from_fn_interior(grid, |x, z| {
        let r2 = x[0] * x[0] + x[1] * x[1];
        let cutoff = (1.0 - r2).max(0.0);
        bumps
            .iter()
            .map(|&(c, w, amp, m)| {
                let d2 = (x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2);
                amp * (-d2 / (2.0 * w * w)).exp() * Complex64::from_polar(1.0, 2.0 * PI * m * z)
            })
            .sum::<Complex64>()
            * cutoff
    })
}

pub fn random_tangent(n_z: usize, rng: &mut impl Rng) -> glvortex_core::TangentModuli {
    glvortex_core::TangentModuli {
        mu: rng.gen_range(-1.0..1.0),
        xi: (0..n_z)
            .map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
            .collect(),
    }
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

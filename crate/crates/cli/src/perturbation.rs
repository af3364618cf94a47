//! Seeded smooth perturbations used to place initial data off the filament
//! manifold.

use std::f64::consts::PI;
use std::sync::Arc;

use glvortex_core::{sobolev_norm, ComplexField, Complex64, FilamentFrame, Grid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{CliError, Result};

/// Sum of five Gaussian bumps with random centres (`|c_j| < R/2`), widths,
/// complex amplitudes and `z`-wavenumbers in `-2..=2`, tapered by
/// `1 - |x|^2/R^2`. Vanishes on the boundary band.
pub fn smooth_field(grid: &Arc<Grid>, seed: u64) -> ComplexField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = grid.spec().disc_radius;
    let bumps: Vec<_> = (0..5)
        .map(|_| {
            let c = [rng.gen_range(-0.5..0.5) * r, rng.gen_range(-0.5..0.5) * r];
            let w = rng.gen_range(0.1..0.4) * r;
            let amp = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let m = rng.gen_range(-2i32..=2) as f64;
            (c, w, amp, m)
        })
        .collect();
    ComplexField::from_fn_interior(grid, |x, z| {
        let taper = (1.0 - (x[0] * x[0] + x[1] * x[1]) / (r * r)).max(0.0);
        bumps
            .iter()
            .map(|&(c, w, amp, m)| {
                let d2 = (x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2);
                amp * (-d2 / (2.0 * w * w)).exp() * Complex64::from_polar(1.0, 2.0 * PI * m * z)
            })
            .sum::<Complex64>()
            * taper
    })
}

/// Zero-trace offset of `X^2` norm `size`, orthogonal to the translation and
/// gauge directions at `frame`, so that the frame's moduli remain the fit of
/// `f(sigma) + offset`.
pub fn manifold_offset(frame: &FilamentFrame, seed: u64, size: f64) -> Result<ComplexField> {
    let grid = frame.field().grid();
    let w = frame.orthogonal_complement(&smooth_field(grid, seed), true)?;
    let norm = sobolev_norm(&w, 2)?;
    if !(norm > 0.0) {
        return Err(CliError::Config("perturbation vanishes after projection".into()));
    }
    Ok(w.scaled(Complex64::new(size / norm, 0.0)))
}

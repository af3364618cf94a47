//! Shared fixtures for the kernel benchmarks.

use std::sync::Arc;

use glvortex_core::{solve_profile, CurveMode, FilamentModel, Grid, GridSpec, Moduli, Result};

/// Filament model on the resolving grid at `eps` with the default profile.
pub fn model(eps: f64, n_z: usize) -> Result<FilamentModel> {
    let grid = Grid::new(GridSpec::resolving(eps, 1.0, n_z)?)?;
    let profile = solve_profile(eps, 2.0, 4096)?;
    FilamentModel::new(grid, Arc::new(profile))
}

/// A `k = 1` helix of amplitude `a`.
pub fn helix(n_z: usize, a: f64) -> Moduli {
    let modes = [CurveMode {
        amplitude: a,
        wavenumber: 1,
        phase: 0.0,
    }];
    Moduli::new(0.0, glvortex_core::Curve::from_modes(n_z, &modes))
}

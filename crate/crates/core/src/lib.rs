//! Numerical laboratory for Ginzburg-Landau vortex filaments on a periodic
//! cylinder: field discretization, the planar vortex profile, the filament
//! manifold with its symplectic projection, energy-conserving time stepping,
//! binormal curvature flow, linearized spectral analysis and concentration
//! diagnostics.

pub mod banded;
pub mod bnf;
pub mod curve;
pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod grid;
pub mod io;
pub mod linearized;
pub mod manifold;
pub mod profile;
pub mod spectral;

pub use error::{Error, Result};
pub use grid::{
    gradient, inner_product, integrate, integrate_with, laplacian, second_derivatives,
    sobolev_norm, ComplexField, Grid, GridSpec, NodeKind, RealField, VectorField3,
};
pub use num_complex::Complex64;
pub use spectral::PeriodicSpectrum;
pub use profile::{solve_profile, PlanarEnergy, RadialProfile, VortexJet};
pub use curve::{Curve, CurveMode, Moduli, TangentModuli, MODULI_SCHEMA_VERSION};
pub use manifold::{
    FilamentFrame, FilamentModel, FitOptions, FitOutcome, JsigmaSolution, SymplecticMatrixField,
};
pub use bnf::{bnf_rhs, bnf_step, effective_rhs, effective_step, EffectiveRhs};
pub use diagnostics::{
    concentration_compare, extract_zero_curve, jacobian_field, ConcentrationReport, TestFunction,
    TestVectorField, ZeroLocus,
};
pub use io::{load_checkpoint, save_checkpoint, Checkpoint, CHECKPOINT_VERSION};
pub use linearized::{
    apply_n, coercivity_gap, planar_gap, unprojected_minimum, zero_mode_residuals, EigenOptions,
    GapEstimate, LinearOperator, SpectralReport, ZeroModeResiduals,
};
pub use dynamics::{
    energy, energy_density, evolve, gl_gradient, step_count, EvolutionState, Observation,
    SolverConfig, Stepper,
};

//! Time integration of `i u_t = -Delta u + eps^-2 (|u|^2 - 1) u` with the
//! Dirichlet trace held fixed, and the discrete Ginzburg-Landau energy.
//!
//! The discrete energy sums squared differences over grid edges with at least
//! one interior endpoint. Its exact gradient is the five-point Laplacian plus
//! the spectral `z` part, so the midpoint (Delfour-Fortin-Payre) scheme below
//! conserves it up to the fixed-point tolerance.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::banded::{BandedLdl, SymmetricBand};
use crate::error::{Error, Result};
use crate::grid::{integrate, laplacian, ComplexField, Grid, RealField};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub dt: f64,
    pub epsilon: f64,
    pub max_fixed_point_iters: usize,
    pub fp_tol: f64,
    pub energy_drift_abort: f64,
}

impl SolverConfig {
    /// Defaults: `dt = eps^2 / 4`, tolerance `1e-12`, abort at `1e-4` drift.
    pub fn new(epsilon: f64) -> Self {
        Self {
            dt: 0.25 * epsilon * epsilon,
            epsilon,
            max_fixed_point_iters: 100,
            fp_tol: 1e-12,
            energy_drift_abort: 1e-4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon <= 0.25) {
            return Err(Error::EpsilonOutOfRange(self.epsilon));
        }
        if !(self.dt > 0.0 && self.dt <= 0.5 * self.epsilon * self.epsilon) {
            return Err(Error::InvalidArgument(format!(
                "dt = {} must lie in (0, eps^2/2]",
                self.dt
            )));
        }
        if !(self.fp_tol > 0.0 && self.fp_tol <= 1e-10) {
            return Err(Error::InvalidArgument(format!("fp_tol = {} > 1e-10", self.fp_tol)));
        }
        if self.max_fixed_point_iters == 0 {
            return Err(Error::InvalidArgument("max_fixed_point_iters = 0".into()));
        }
        if !(self.energy_drift_abort > 0.0) {
            return Err(Error::InvalidArgument("energy_drift_abort must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct EvolutionState {
    pub field: ComplexField,
    pub time: f64,
    pub step_count: u64,
    pub energy_initial: f64,
}

impl EvolutionState {
    pub fn new(field: ComplexField, epsilon: f64) -> Self {
        let e = energy(&field, epsilon);
        Self {
            field,
            time: 0.0,
            step_count: 0,
            energy_initial: e,
        }
    }

    /// Relative energy drift; absolute when the initial energy is zero.
    pub fn relative_drift(&self, epsilon: f64) -> f64 {
        let e = energy(&self.field, epsilon);
        let scale = if self.energy_initial != 0.0 { self.energy_initial.abs() } else { 1.0 };
        (e - self.energy_initial).abs() / scale
    }
}

/// `E'(u) = -Delta u + eps^-2 (|u|^2 - 1) u` at interior nodes.
pub fn gl_gradient(u: &ComplexField, epsilon: f64) -> ComplexField {
    let grid = u.grid();
    let nz = grid.n_z();
    let ie2 = 1.0 / (epsilon * epsilon);
    let mut out = laplacian(u);
    let v = u.values();
    let o = out.values_mut();
    for &p in grid.interior() {
        for i in p * nz..(p + 1) * nz {
            o[i] = -o[i] + ie2 * (v[i].norm_sqr() - 1.0) * v[i];
        }
    }
    out
}

/// Pointwise energy density whose quadrature is the discrete energy.
/// Each edge between two interior nodes is split evenly; an edge to the band
/// is assigned to its interior endpoint.
pub fn energy_density(u: &ComplexField, epsilon: f64) -> RealField {
    let grid = u.grid();
    let (n, nz) = (grid.n_x(), grid.n_z());
    let ih2 = 1.0 / (grid.h_x() * grid.h_x());
    let q = 0.25 / (epsilon * epsilon);
    let v = u.values();
    let mut dz = v.to_vec();
    grid.spectrum().differentiate_columns(&mut dz, 1);
    let mut out = RealField::zeros(grid);
    let o = out.values_mut();
    for &p in grid.interior() {
        for iz in 0..nz {
            let i = p * nz + iz;
            let mut edges = 0.0;
            for nb in [p + n, p - n, p + 1, p - 1] {
                let w = if grid.compact_index(nb).is_some() { 0.5 } else { 1.0 };
                edges += w * (v[nb * nz + iz] - v[i]).norm_sqr();
            }
            let pot = v[i].norm_sqr() - 1.0;
            o[i] = 0.5 * edges * ih2 + 0.5 * dz[i].norm_sqr() + q * pot * pot;
        }
    }
    out
}

/// Discrete Ginzburg-Landau energy, `integrate(energy_density(u))`.
pub fn energy(u: &ComplexField, epsilon: f64) -> f64 {
    integrate(&energy_density(u, epsilon))
}

/// Crank-Nicolson stepper with factored `z`-mode systems
/// `I + i tau (-Delta_x + k^2)`, `tau = dt / 2`.
#[derive(Clone, Debug)]
pub struct Stepper {
    grid: Arc<Grid>,
    cfg: SolverConfig,
    factors: Vec<Arc<BandedLdl>>,
    mode_factor: Vec<usize>,
    reverse: bool,
}

/// Interior neighbours (compact indices) of each interior node and the
/// matrix bandwidth of the row-major ordering.
pub(crate) fn interior_bandwidth(grid: &Grid) -> usize {
    let n = grid.n_x();
    grid.interior()
        .iter()
        .enumerate()
        .filter_map(|(q, &p)| grid.compact_index(p + n).map(|r| r - q))
        .max()
        .unwrap_or(1)
        .max(1)
}

impl Stepper {
    pub fn new(grid: &Arc<Grid>, cfg: SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let n = grid.n_x();
        let nz = grid.n_z();
        let tau = 0.5 * cfg.dt;
        let ih2 = 1.0 / (grid.h_x() * grid.h_x());
        let b = interior_bandwidth(grid);
        let wavenumbers = grid.spectrum().wavenumbers();
        let mut distinct: Vec<f64> = Vec::new();
        let mut mode_factor = Vec::with_capacity(nz);
        for &k in wavenumbers {
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
                a.add(q, q, Complex64::new(1.0, tau * (4.0 * ih2 + k2)));
                for nb in [p - n, p - 1] {
                    if let Some(r) = grid.compact_index(nb) {
                        a.add(q, r, Complex64::new(0.0, -tau * ih2));
                    }
                }
            }
            factors.push(Arc::new(a.factor()?));
        }
        Ok(Self {
            grid: Arc::clone(grid),
            cfg,
            factors,
            mode_factor,
            reverse: false,
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    /// The same scheme with `dt` negated; the factors are shared.
    pub fn reversed(&self) -> Self {
        let mut s = self.clone();
        s.reverse = !s.reverse;
        s
    }

    fn signed_dt(&self) -> f64 {
        if self.reverse {
            -self.cfg.dt
        } else {
            self.cfg.dt
        }
    }

    /// One midpoint step. The state's trace is kept as Dirichlet data.
    pub fn step(&self, state: &EvolutionState) -> Result<EvolutionState> {
        let grid = &self.grid;
        if !state.field.grid().same_as(grid) {
            return Err(Error::GridMismatch);
        }
        let (n, nz) = (grid.n_x(), grid.n_z());
        let m_int = grid.interior().len();
        let ih2 = 1.0 / (grid.h_x() * grid.h_x());
        let ie2 = 1.0 / (self.cfg.epsilon * self.cfg.epsilon);
        let itau = Complex64::new(0.0, 0.5 * self.signed_dt());
        let u = state.field.values();

        // Compact interior copies, node-major with z fastest.
        let mut u0 = vec![ZERO; m_int * nz];
        let mut forcing = vec![ZERO; m_int * nz];
        for (q, &p) in grid.interior().iter().enumerate() {
            u0[q * nz..(q + 1) * nz].copy_from_slice(&u[p * nz..(p + 1) * nz]);
            for nb in [p + n, p - n, p + 1, p - 1] {
                if grid.compact_index(nb).is_none() {
                    for iz in 0..nz {
                        forcing[q * nz + iz] += u[nb * nz + iz] * ih2;
                    }
                }
            }
        }

        let mut m = u0.clone();
        let mut rhs = vec![ZERO; m_int * nz];
        let mut column = vec![ZERO; m_int];
        let mut converged = false;
        let mut increment = f64::INFINITY;
        for _ in 0..self.cfg.max_fixed_point_iters {
            for i in 0..m_int * nz {
                let next = 2.0 * m[i] - u0[i];
                let amp = 0.5 * (u0[i].norm_sqr() + next.norm_sqr()) - 1.0;
                rhs[i] = u0[i] - itau * (ie2 * amp * m[i] - forcing[i]);
            }
            grid.spectrum().forward(&mut rhs);
            for j in 0..nz {
                for q in 0..m_int {
                    column[q] = rhs[q * nz + j];
                }
                self.factors[self.mode_factor[j]].solve_in_place(&mut column, self.reverse);
                for q in 0..m_int {
                    rhs[q * nz + j] = column[q];
                }
            }
            grid.spectrum().inverse(&mut rhs);
            increment = rhs
                .iter()
                .zip(&m)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            std::mem::swap(&mut m, &mut rhs);
            if !increment.is_finite() {
                break;
            }
            if increment <= self.cfg.fp_tol {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::StepFailed(format!(
                "fixed point did not reach {:e} in {} iterations (last increment {increment:e})",
                self.cfg.fp_tol, self.cfg.max_fixed_point_iters
            )));
        }

        let mut field = state.field.clone();
        let out = field.values_mut();
        for (q, &p) in grid.interior().iter().enumerate() {
            for iz in 0..nz {
                out[p * nz + iz] = 2.0 * m[q * nz + iz] - u0[q * nz + iz];
            }
        }
        let next = EvolutionState {
            field,
            time: state.time + self.signed_dt(),
            step_count: state.step_count + 1,
            energy_initial: state.energy_initial,
        };
        let drift = next.relative_drift(self.cfg.epsilon);
        if !(drift <= self.cfg.energy_drift_abort) {
            return Err(Error::Unhealthy {
                drift,
                limit: self.cfg.energy_drift_abort,
            });
        }
        Ok(next)
    }
}

/// One observation along a trajectory. Observer failures are recorded, not
/// propagated.
#[derive(Clone, Debug)]
pub struct Observation<R> {
    pub step: u64,
    pub time: f64,
    pub energy: f64,
    pub outcome: std::result::Result<R, String>,
}

/// Runs `n_steps` steps, observing every state whose step count is a
/// multiple of `stride` (so a resumed run observes the same steps).
pub fn evolve<R>(
    stepper: &Stepper,
    initial: EvolutionState,
    n_steps: u64,
    stride: u64,
    mut observer: impl FnMut(&EvolutionState) -> Result<R>,
) -> Result<(EvolutionState, Vec<Observation<R>>)> {
    if stride == 0 {
        return Err(Error::InvalidArgument("observer stride must be positive".into()));
    }
    let eps = stepper.config().epsilon;
    let mut records = Vec::new();
    let mut observe = |s: &EvolutionState, records: &mut Vec<Observation<R>>| {
        records.push(Observation {
            step: s.step_count,
            time: s.time,
            energy: energy(&s.field, eps),
            outcome: observer(s).map_err(|e| e.to_string()),
        });
    };
    let mut state = initial;
    if state.step_count % stride == 0 {
        observe(&state, &mut records);
    }
    for _ in 0..n_steps {
        state = stepper.step(&state)?;
        if state.step_count % stride == 0 {
            observe(&state, &mut records);
        }
    }
    Ok((state, records))
}

/// Number of steps of size `dt` covering `[0, t_final]`.
pub fn step_count(t_final: f64, dt: f64) -> u64 {
    (t_final / dt + 1e-9).floor() as u64
}

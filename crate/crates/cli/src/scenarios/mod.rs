//! Scenario orchestration. Time-dependent scenarios share one driver that
//! observes on global step multiples and checkpoints observer state with the
//! field, so a run resumed from any checkpoint appends exactly the records
//! of the unsplit run.

mod concentration;
mod profile;
mod spectral;
mod stationary;
mod tracking;

use std::fmt;
use std::path::PathBuf;
use std::sync::Arc;

use glvortex_core::io::cached_profile;
use glvortex_core::{
    energy, load_checkpoint, save_checkpoint, step_count, ComplexField, EvolutionState,
    FilamentModel, Grid, SolverConfig, Stepper,
};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::output::{Check, RunDir};
use crate::perturbation::manifold_offset;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Profile,
    Stationary,
    AdiabaticTracking,
    Concentration,
    Spectral,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Profile => "profile",
            Scenario::Stationary => "stationary",
            Scenario::AdiabaticTracking => "adiabatic-tracking",
            Scenario::Concentration => "concentration",
            Scenario::Spectral => "spectral",
        }
    }

    fn evolves(self) -> bool {
        matches!(
            self,
            Scenario::Stationary | Scenario::AdiabaticTracking | Scenario::Concentration
        )
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, Default)]
pub struct Control {
    pub resume: Option<PathBuf>,
    /// Stop (with a checkpoint) once this global step is reached.
    pub stop_after: Option<u64>,
}

#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub checks: Vec<Check>,
    pub steps: u64,
    pub resumed_at_step: Option<u64>,
    pub stopped: bool,
}

pub fn execute(scenario: Scenario, cfg: &ExperimentConfig, dir: &RunDir, ctl: &Control) -> Result<Outcome> {
    if ctl.resume.is_some() && !scenario.evolves() {
        return Err(CliError::Resume(format!("scenario {scenario} has no time evolution")));
    }
    match scenario {
        Scenario::Profile => profile::run(cfg, dir),
        Scenario::Spectral => spectral::run(cfg, dir),
        Scenario::Stationary => stationary::run(cfg, dir, ctl),
        Scenario::AdiabaticTracking => tracking::run(cfg, dir, ctl),
        Scenario::Concentration => concentration::run(cfg, dir, ctl),
    }
}

/// Filament model at `eps`, with the profile cached under `profiles/`.
fn model_for(cfg: &ExperimentConfig, dir: &RunDir, eps: f64) -> Result<FilamentModel> {
    let grid = Grid::new(cfg.grid_spec(eps)?)?;
    std::fs::create_dir_all(dir.path("profiles"))?;
    let path = dir.path("profiles").join(format!("eps_{eps}.glp"));
    let profile = cached_profile(&path, eps, cfg.profile_radius(), cfg.profile_samples)?;
    Ok(FilamentModel::new(grid, Arc::new(profile))?)
}

/// `f(sigma_0) + delta_2 * offset`.
fn initial_field(cfg: &ExperimentConfig, model: &FilamentModel) -> Result<ComplexField> {
    let frame = model.frame(&cfg.initial_moduli())?;
    let mut u = frame.field().clone();
    if cfg.perturbation > 0.0 {
        let w = manifold_offset(&frame, cfg.seed, cfg.perturbation)?;
        u = u.add(&w)?;
    }
    Ok(u)
}

/// Fields common to every trajectory record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub step: u64,
    pub t: f64,
    pub energy: f64,
    pub drift: f64,
}

impl Sample {
    fn of(state: &EvolutionState, eps: f64) -> Self {
        let e = energy(&state.field, eps);
        Self {
            step: state.step_count,
            t: state.time,
            energy: e,
            drift: state.relative_drift(eps),
        }
    }
}

trait Observer {
    fn observe(&mut self, state: &EvolutionState, dir: &RunDir) -> Result<()>;
    /// Observer state needed to continue from a checkpoint.
    fn snapshot(&self) -> Result<serde_json::Value>;
    fn restore(&mut self, snapshot: serde_json::Value) -> Result<()>;
}

struct Driven {
    steps: u64,
    resumed_at_step: Option<u64>,
    stopped: bool,
}

fn checkpoint(
    cfg: &ExperimentConfig,
    scenario: Scenario,
    dir: &RunDir,
    state: &EvolutionState,
    observer: &dyn Observer,
) -> Result<()> {
    let extra = json!({
        "config_hash": cfg.hash(),
        "scenario": scenario.name(),
        "observer": observer.snapshot()?,
    });
    save_checkpoint(&dir.checkpoint_path(state.step_count), state, cfg.epsilon, &extra)?;
    Ok(())
}

/// Evolves from `initial` (or the resume checkpoint) to `t_final`.
fn drive(
    cfg: &ExperimentConfig,
    scenario: Scenario,
    dir: &RunDir,
    ctl: &Control,
    model: &FilamentModel,
    initial: ComplexField,
    observer: &mut dyn Observer,
) -> Result<Driven> {
    let eps = cfg.epsilon;
    let solver = SolverConfig {
        dt: cfg.dt(),
        ..SolverConfig::new(eps)
    };
    let stepper = Stepper::new(model.grid(), solver)?;
    let total = step_count(cfg.t_final, cfg.dt());
    let stride = cfg.observe_stride;
    let (mut state, resumed_at_step) = match &ctl.resume {
        Some(path) => {
            let ck = load_checkpoint(path)?;
            let hash = ck.extra.get("config_hash").and_then(|v| v.as_str());
            if hash != Some(cfg.hash().as_str()) {
                return Err(CliError::Resume("checkpoint was written under a different config".into()));
            }
            if ck.extra.get("scenario").and_then(|v| v.as_str()) != Some(scenario.name()) {
                return Err(CliError::Resume("checkpoint belongs to another scenario".into()));
            }
            if !ck.state.field.grid().same_as(model.grid()) || ck.epsilon != eps {
                return Err(CliError::Resume("checkpoint grid or epsilon differs".into()));
            }
            observer.restore(ck.extra["observer"].clone())?;
            dir.truncate_after(ck.state.step_count, ck.state.time)?;
            let step = ck.state.step_count;
            (ck.state, Some(step))
        }
        None => {
            let s = EvolutionState::new(initial, eps);
            observer.observe(&s, dir)?;
            (s, None)
        }
    };
    let mut saved_at = None;
    while state.step_count < total {
        if ctl.stop_after.map_or(false, |k| state.step_count >= k) {
            if saved_at != Some(state.step_count) {
                checkpoint(cfg, scenario, dir, &state, observer)?;
            }
            return Ok(Driven {
                steps: state.step_count,
                resumed_at_step,
                stopped: true,
            });
        }
        state = stepper.step(&state)?;
        if state.step_count % stride == 0 {
            observer.observe(&state, dir)?;
        }
        let on_stride = cfg.checkpoint_stride.map_or(false, |c| state.step_count % c == 0);
        if on_stride || state.step_count == total {
            checkpoint(cfg, scenario, dir, &state, observer)?;
            saved_at = Some(state.step_count);
        }
    }
    Ok(Driven {
        steps: state.step_count,
        resumed_at_step,
        stopped: false,
    })
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(f64::NEG_INFINITY, |a, b| {
        if a.is_nan() || b.is_nan() {
            f64::NAN
        } else {
            a.max(b)
        }
    })
}

/// Number of consecutive increases in a sequence that should not increase.
fn increases(values: &[f64]) -> f64 {
    values.windows(2).filter(|w| !(w[1] <= w[0])).count() as f64
}

fn drift_check(samples: &[Sample]) -> Check {
    Check::at_most("energy_drift", max_of(samples.iter().map(|s| s.drift.abs())), 1e-6)
}

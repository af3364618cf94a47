//! Lifted straight filament: the evolution should stay at the initial state.

use glvortex_core::{extract_zero_curve, sobolev_norm, ComplexField, Curve, EvolutionState};
use serde::{Deserialize, Serialize};

use super::{drift_check, drive, initial_field, max_of, model_for, Control, Observer, Outcome, Sample, Scenario};
use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::output::{Check, RunDir};

pub const MAX_DEVIATION: f64 = 1e-3;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StationaryRecord {
    #[serde(flatten)]
    pub sample: Sample,
    /// `||u_t - u_0||_{X^0}`.
    pub deviation_x0: f64,
    pub deviation_x2: f64,
}

struct Stationary {
    u0: ComplexField,
    eps: f64,
    n_z: usize,
}

impl Observer for Stationary {
    fn observe(&mut self, state: &EvolutionState, dir: &RunDir) -> Result<()> {
        let diff = state.field.sub(&self.u0)?;
        dir.append_trajectory(&StationaryRecord {
            sample: Sample::of(state, self.eps),
            deviation_x0: sobolev_norm(&diff, 0)?,
            deviation_x2: sobolev_norm(&diff, 2)?,
        })?;
        if let Ok(curve) = extract_zero_curve(&state.field, &Curve::zero(self.n_z))?.into_curve() {
            dir.append_curve(state.time, &curve)?;
        }
        Ok(())
    }

    fn snapshot(&self) -> Result<serde_json::Value> {
        Ok(serde_json::Value::Null)
    }

    fn restore(&mut self, _: serde_json::Value) -> Result<()> {
        Ok(())
    }
}

pub fn run(cfg: &ExperimentConfig, dir: &RunDir, ctl: &Control) -> Result<Outcome> {
    if !cfg.modes.is_empty() {
        return Err(CliError::Config("the stationary scenario takes a straight filament (no modes)".into()));
    }
    let model = model_for(cfg, dir, cfg.epsilon)?;
    let u0 = initial_field(cfg, &model)?;
    let mut obs = Stationary {
        u0: u0.clone(),
        eps: cfg.epsilon,
        n_z: cfg.n_z,
    };
    let driven = drive(cfg, Scenario::Stationary, dir, ctl, &model, u0, &mut obs)?;
    let mut out = Outcome {
        steps: driven.steps,
        resumed_at_step: driven.resumed_at_step,
        stopped: driven.stopped,
        checks: Vec::new(),
    };
    if !driven.stopped {
        let records: Vec<StationaryRecord> = dir.read_trajectory()?;
        let samples: Vec<Sample> = records.iter().map(|r| r.sample.clone()).collect();
        out.checks = vec![
            Check::at_most("max_deviation", max_of(records.iter().map(|r| r.deviation_x0)), MAX_DEVIATION),
            drift_check(&samples),
        ];
    }
    Ok(out)
}

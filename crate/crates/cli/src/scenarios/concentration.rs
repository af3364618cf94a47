//! Vorticity and energy concentration on the filament: a sweep over `eps` at
//! `u = f(sigma_0)`, then reports along the evolution at the configured `eps`.

use std::f64::consts::PI;

use glvortex_core::diagnostics::slice_degree_integral;
use glvortex_core::{
    concentration_compare, extract_zero_curve, jacobian_field, ComplexField, ConcentrationReport,
    Curve, EvolutionState, TestFunction, TestVectorField,
};
use serde::{Deserialize, Serialize};

use super::{drift_check, drive, increases, initial_field, max_of, model_for, Control, Observer, Outcome, Sample, Scenario};
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::output::{Check, RunDir};

/// Discrepancies relative to the `pi`-scale references.
pub const MAX_DISCREPANCY: f64 = 0.15;
/// Relative error of the slice degree integral against `pi`.
pub const MAX_DEGREE_ERROR: f64 = 0.1;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConcentrationLine {
    /// `u = f(sigma_0)` at one `eps` of the sweep.
    Sweep {
        epsilon: f64,
        degree_error: f64,
        report: ConcentrationReport,
    },
    /// Along the evolution.
    Trajectory {
        step: u64,
        epsilon: f64,
        degree_error: f64,
        report: ConcentrationReport,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConcentrationRecord {
    #[serde(flatten)]
    pub sample: Sample,
    pub vorticity_relative: f64,
    pub energy_relative: f64,
    pub degree_error: f64,
}

/// Worst relative deviation of the slice degree integrals from `pi`.
fn degree_error(u: &ComplexField) -> f64 {
    let j = jacobian_field(u);
    max_of((0..u.grid().n_z()).map(|iz| (slice_degree_integral(&j, iz) - PI).abs() / PI))
}

struct Tracer {
    eps: f64,
    x_field: TestVectorField,
    phi: TestFunction,
    guess: Curve,
}

impl Observer for Tracer {
    fn observe(&mut self, state: &EvolutionState, dir: &RunDir) -> Result<()> {
        let u = &state.field;
        let curve = extract_zero_curve(u, &self.guess)?.into_curve()?;
        let report = concentration_compare(u, state.time, &curve, &self.x_field, &self.phi, self.eps, None)?;
        let degree = degree_error(u);
        dir.append_trajectory(&ConcentrationRecord {
            sample: Sample::of(state, self.eps),
            vorticity_relative: report.vorticity_relative(),
            energy_relative: report.energy_relative(),
            degree_error: degree,
        })?;
        dir.append_report(&ConcentrationLine::Trajectory {
            step: state.step_count,
            epsilon: self.eps,
            degree_error: degree,
            report,
        })?;
        dir.append_curve(state.time, &curve)?;
        self.guess = curve;
        Ok(())
    }

    fn snapshot(&self) -> Result<serde_json::Value> {
        Ok(serde_json::to_value(&self.guess)?)
    }

    fn restore(&mut self, snapshot: serde_json::Value) -> Result<()> {
        self.guess = serde_json::from_value(snapshot)?;
        Ok(())
    }
}

pub fn run(cfg: &ExperimentConfig, dir: &RunDir, ctl: &Control) -> Result<Outcome> {
    let sigma = cfg.initial_moduli();
    let (x_field, phi) = (cfg.vector_field(), cfg.scalar_field());
    if ctl.resume.is_none() {
        for eps in cfg.epsilons() {
            let model = model_for(cfg, dir, eps)?;
            let u = model.build_filament(&sigma)?;
            let report = concentration_compare(&u, 0.0, &sigma.curve, &x_field, &phi, eps, None)?;
            dir.append_report(&ConcentrationLine::Sweep {
                epsilon: eps,
                degree_error: degree_error(&u),
                report,
            })?;
        }
    }
    let mut out = Outcome::default();
    if cfg.t_final > 0.0 {
        let model = model_for(cfg, dir, cfg.epsilon)?;
        let u0 = initial_field(cfg, &model)?;
        let mut tracer = Tracer {
            eps: cfg.epsilon,
            x_field,
            phi,
            guess: sigma.curve.clone(),
        };
        let driven = drive(cfg, Scenario::Concentration, dir, ctl, &model, u0, &mut tracer)?;
        out.steps = driven.steps;
        out.resumed_at_step = driven.resumed_at_step;
        out.stopped = driven.stopped;
    }
    if out.stopped {
        return Ok(out);
    }

    let lines: Vec<ConcentrationLine> = dir.read_reports()?;
    let mut sweep: Vec<(f64, f64, f64, f64)> = lines
        .iter()
        .filter_map(|l| match l {
            ConcentrationLine::Sweep {
                epsilon,
                degree_error,
                report,
            } => Some((*epsilon, report.vorticity_relative(), report.energy_relative(), *degree_error)),
            _ => None,
        })
        .collect();
    sweep.sort_by(|a, b| b.0.total_cmp(&a.0));
    let finest = sweep.last().copied().unwrap_or((f64::NAN, f64::NAN, f64::NAN, f64::NAN));
    let vort: Vec<f64> = sweep.iter().map(|s| s.1).collect();
    let ener: Vec<f64> = sweep.iter().map(|s| s.2).collect();
    let mut checks = vec![
        Check::at_most("vorticity_discrepancy", finest.1, MAX_DISCREPANCY),
        Check::at_most("energy_discrepancy", finest.2, MAX_DISCREPANCY),
        Check::at_most("slice_degree", finest.3, MAX_DEGREE_ERROR),
    ];
    if sweep.len() > 1 {
        checks.push(Check::at_most("vorticity_monotone", increases(&vort), 0.0));
        checks.push(Check::at_most("energy_monotone", increases(&ener), 0.0));
    }
    if cfg.t_final > 0.0 {
        let records: Vec<ConcentrationRecord> = dir.read_trajectory()?;
        let samples: Vec<Sample> = records.iter().map(|r| r.sample.clone()).collect();
        checks.push(drift_check(&samples));
        let worst = |f: fn(&ConcentrationRecord) -> f64| max_of(records.iter().map(f));
        checks.push(
            Check::at_most("trajectory_vorticity_discrepancy", worst(|r| r.vorticity_relative), MAX_DISCREPANCY)
                .informational(),
        );
        checks.push(
            Check::at_most("trajectory_energy_discrepancy", worst(|r| r.energy_relative), MAX_DISCREPANCY)
                .informational(),
        );
    }
    out.checks = checks;
    Ok(out)
}

//! Adiabatic tracking: fit moduli along the field evolution and compare them
//! with the effective moduli dynamics and the binormal flow.

use std::f64::consts::PI;

use glvortex_core::{
    bnf_step, effective_step, extract_zero_curve, sobolev_norm, Curve, EvolutionState,
    FilamentModel, FitOptions, Moduli,
};
use serde::{Deserialize, Serialize};

use super::{drift_check, drive, initial_field, max_of, model_for, Control, Observer, Outcome, Sample, Scenario};
use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::output::{Check, RunDir};

/// Relative slack on the rotation frequency.
pub const FREQUENCY_SLACK: f64 = 0.2;
/// Sup-distance to the binormal flow, in units of the mode amplitude.
pub const BNF_DISTANCE: f64 = 0.2;
/// Allowed growth of the remainder over its initial value.
pub const REMAINDER_GROWTH: f64 = 10.0;
/// The remainder must stay below this fraction of `eps`.
pub const REMAINDER_SCALE: f64 = 0.1;
/// Envelope `10 sqrt(a)`, recorded only.
pub const REMAINDER_ENVELOPE: f64 = 10.0;
/// RK4 substep bounds in units of `h_z^2`: the binormal flow has purely
/// imaginary spectrum up to `(pi n_z)^2`, the effective flow up to a few
/// times that.
const BNF_SUBSTEP: f64 = 0.25;
const EFFECTIVE_SUBSTEP: f64 = 0.08;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrackingRecord {
    #[serde(flatten)]
    pub sample: Sample,
    pub lambda: f64,
    pub curve: Vec<[f64; 2]>,
    pub fit_residual: f64,
    pub fit_iterations: usize,
    /// `||u_t - f(sigma_t)||_{X^0}` and `X^2`.
    pub remainder_x0: f64,
    pub remainder_x2: f64,
    /// Sup-distance between the zero set and the fitted curve, if every
    /// slice has a zero.
    pub zero_curve_distance: Option<f64>,
    pub bnf_distance: f64,
    pub effective_distance: f64,
    /// Leading-mode coefficients `[re, im]` of the fitted, binormal-flow and
    /// effective curves.
    pub mode: [f64; 2],
    pub bnf_mode: [f64; 2],
    pub effective_mode: [f64; 2],
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct TrackerState {
    sigma: Moduli,
    bnf: Curve,
    effective: Moduli,
    t_last: f64,
}

struct Tracker<'a> {
    model: &'a FilamentModel,
    eps: f64,
    wavenumber: i64,
    state: TrackerState,
}

fn substeps(span: f64, max_dt: f64) -> (usize, f64) {
    let n = (span / max_dt).ceil().max(1.0) as usize;
    (n, span / n as f64)
}

fn coefficient(c: &Curve, k: i64) -> [f64; 2] {
    let m = c.mode_coefficient(k);
    [m.re, m.im]
}

impl Tracker<'_> {
    fn advance_references(&mut self, t: f64) -> Result<()> {
        let span = t - self.state.t_last;
        if span <= 0.0 {
            return Ok(());
        }
        let hz2 = self.model.grid().h_z().powi(2);
        let (n, dt) = substeps(span, BNF_SUBSTEP * hz2);
        for _ in 0..n {
            self.state.bnf = bnf_step(&self.state.bnf, dt)?;
        }
        let (n, dt) = substeps(span, EFFECTIVE_SUBSTEP * hz2);
        for _ in 0..n {
            self.state.effective = effective_step(self.model, &self.state.effective, dt)?;
        }
        self.state.t_last = t;
        Ok(())
    }
}

impl Observer for Tracker<'_> {
    fn observe(&mut self, state: &EvolutionState, dir: &RunDir) -> Result<()> {
        self.advance_references(state.time)?;
        let u = &state.field;
        let fit = self.model.moduli_fit(u, &self.state.sigma, &FitOptions::default())?;
        self.state.sigma = fit.moduli.clone();
        let remainder = u.sub(&self.model.build_filament(&fit.moduli)?)?;
        let curve = &fit.moduli.curve;
        let zero_curve_distance = extract_zero_curve(u, curve)?
            .into_curve()
            .ok()
            .map(|z| z.sup_distance(curve));
        let k = self.wavenumber;
        dir.append_trajectory(&TrackingRecord {
            sample: Sample::of(state, self.eps),
            lambda: fit.moduli.lambda,
            curve: curve.points.clone(),
            fit_residual: fit.residual,
            fit_iterations: fit.iterations,
            remainder_x0: sobolev_norm(&remainder, 0)?,
            remainder_x2: sobolev_norm(&remainder, 2)?,
            zero_curve_distance,
            bnf_distance: curve.sup_distance(&self.state.bnf),
            effective_distance: curve.sup_distance(&self.state.effective.curve),
            mode: coefficient(curve, k),
            bnf_mode: coefficient(&self.state.bnf, k),
            effective_mode: coefficient(&self.state.effective.curve, k),
        })?;
        dir.append_curve(state.time, curve)
    }

    fn snapshot(&self) -> Result<serde_json::Value> {
        Ok(serde_json::to_value(&self.state)?)
    }

    fn restore(&mut self, snapshot: serde_json::Value) -> Result<()> {
        self.state = serde_json::from_value(snapshot)?;
        Ok(())
    }
}

/// Least-squares rotation rate `omega` of `c e^{-i omega t}` from unwrapped
/// phases.
pub fn rotation_rate(times: &[f64], modes: &[[f64; 2]]) -> f64 {
    let mut phases = Vec::with_capacity(modes.len());
    let mut prev: Option<f64> = None;
    for m in modes {
        let raw = m[1].atan2(m[0]);
        let p = match prev {
            None => raw,
            Some(q) => q + (raw - q + PI).rem_euclid(2.0 * PI) - PI,
        };
        phases.push(p);
        prev = Some(p);
    }
    let n = times.len() as f64;
    let tm = times.iter().sum::<f64>() / n;
    let pm = phases.iter().sum::<f64>() / n;
    let sxy: f64 = times.iter().zip(&phases).map(|(t, p)| (t - tm) * (p - pm)).sum();
    let sxx: f64 = times.iter().map(|t| (t - tm).powi(2)).sum();
    -sxy / sxx
}

pub fn run(cfg: &ExperimentConfig, dir: &RunDir, ctl: &Control) -> Result<Outcome> {
    let lead = *cfg
        .modes
        .first()
        .ok_or_else(|| CliError::Config("adiabatic tracking needs at least one curve mode".into()))?;
    if lead.wavenumber == 0 || lead.amplitude <= 0.0 {
        return Err(CliError::Config("the leading mode must have nonzero wavenumber and amplitude".into()));
    }
    let model = model_for(cfg, dir, cfg.epsilon)?;
    let sigma0 = cfg.initial_moduli();
    let u0 = initial_field(cfg, &model)?;
    let mut tracker = Tracker {
        model: &model,
        eps: cfg.epsilon,
        wavenumber: lead.wavenumber,
        state: TrackerState {
            sigma: sigma0.clone(),
            bnf: sigma0.curve.clone(),
            effective: sigma0,
            t_last: 0.0,
        },
    };
    let driven = drive(cfg, Scenario::AdiabaticTracking, dir, ctl, &model, u0, &mut tracker)?;
    let mut out = Outcome {
        steps: driven.steps,
        resumed_at_step: driven.resumed_at_step,
        stopped: driven.stopped,
        checks: Vec::new(),
    };
    if !driven.stopped {
        let records: Vec<TrackingRecord> = dir.read_trajectory()?;
        out.checks = checks(cfg, model.grid().h_x(), lead.amplitude, lead.wavenumber, &records);
    }
    Ok(out)
}

fn checks(cfg: &ExperimentConfig, h_x: f64, a: f64, k: i64, records: &[TrackingRecord]) -> Vec<Check> {
    let oracle = (2.0 * PI * k as f64).powi(2);
    let period = 2.0 * PI / oracle;
    let times: Vec<f64> = records.iter().map(|r| r.sample.t).collect();
    let rate = |pick: fn(&TrackingRecord) -> [f64; 2]| {
        let modes: Vec<[f64; 2]> = records.iter().map(pick).collect();
        rotation_rate(&times, &modes) / oracle
    };
    let within_period = records.iter().filter(|r| r.sample.t <= period * (1.0 + 1e-9));
    let r0 = records.first().map_or(f64::NAN, |r| r.remainder_x2);
    let r_max = max_of(records.iter().map(|r| r.remainder_x2));
    let samples: Vec<Sample> = records.iter().map(|r| r.sample.clone()).collect();
    let band = Some(1.0 - FREQUENCY_SLACK);
    let top = Some(1.0 + FREQUENCY_SLACK);
    vec![
        Check::within("rotation_frequency", rate(|r| r.mode), band, top),
        Check::at_most("bnf_distance", max_of(within_period.map(|r| r.bnf_distance)) / a, BNF_DISTANCE),
        Check::at_most("remainder_growth", r_max / r0, REMAINDER_GROWTH),
        Check::at_most("remainder_scale", r_max / cfg.epsilon, REMAINDER_SCALE),
        drift_check(&samples),
        Check::at_most("remainder_envelope", r_max / a.sqrt(), REMAINDER_ENVELOPE).informational(),
        Check::within("bnf_rotation_frequency", rate(|r| r.bnf_mode), band, top).informational(),
        Check::within("effective_rotation_frequency", rate(|r| r.effective_mode), band, top).informational(),
        Check::at_most(
            "effective_distance",
            max_of(records.iter().map(|r| r.effective_distance)) / a,
            BNF_DISTANCE,
        )
        .informational(),
        Check::at_most(
            "zero_curve_agreement",
            max_of(records.iter().map(|r| r.zero_curve_distance.unwrap_or(f64::NAN))) / h_x,
            2.0,
        )
        .informational(),
    ]
}

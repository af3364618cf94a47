//! Coercivity of the linearized energy over `eps` with `delta = eps^p`.

use glvortex_core::{
    coercivity_gap, planar_gap, unprojected_minimum, zero_mode_residuals, Curve, CurveMode,
    EigenOptions, LinearOperator, Moduli, SpectralReport,
};
use serde::{Deserialize, Serialize};

use super::{increases, max_of, model_for, Outcome};
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::output::{Check, RunDir};

/// Relative slack on the `|log eps|^-1` trend of the gap.
pub const TREND_SLACK: f64 = 0.5;
/// The unprojected minimum must fall below this fraction of the gap.
pub const COLLAPSE_FRACTION: f64 = 0.15;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectralLine {
    pub sample: String,
    pub unprojected: f64,
    #[serde(flatten)]
    pub report: SpectralReport,
}

/// The configured curve (or a `k = 1` helix) rescaled to `|gamma|_C2 = delta`.
fn curved_sample(cfg: &ExperimentConfig, delta: f64) -> Curve {
    let modes = if cfg.modes.is_empty() {
        vec![CurveMode {
            amplitude: 1.0,
            wavenumber: 1,
            phase: 0.0,
        }]
    } else {
        cfg.modes.clone()
    };
    let c = Curve::from_modes(cfg.n_z, &modes);
    let s = delta / c.c2_norm();
    Curve {
        points: c.points.iter().map(|p| [s * p[0], s * p[1]]).collect(),
    }
}

pub fn run(cfg: &ExperimentConfig, dir: &RunDir) -> Result<Outcome> {
    let opts = EigenOptions {
        seed: cfg.seed,
        ..EigenOptions::default()
    };
    let mut lines = Vec::new();
    for eps in cfg.epsilons() {
        let model = model_for(cfg, dir, eps)?;
        let delta = eps.powf(cfg.spectral_delta_exponent);
        let beta = planar_gap(&model, &opts)?;
        let samples = [
            ("straight", Moduli::straight(cfg.n_z)),
            ("curved", Moduli::new(cfg.lambda, curved_sample(cfg, delta))),
        ];
        for (name, sigma) in samples {
            let op = LinearOperator::new(&model, &sigma)?;
            let alpha = coercivity_gap(&op, &opts)?;
            let free = unprojected_minimum(&op, &opts)?;
            let line = SpectralLine {
                sample: name.into(),
                unprojected: free.value,
                report: SpectralReport {
                    epsilon: eps,
                    delta,
                    alpha: alpha.value,
                    beta_planar: beta.value,
                    residuals: zero_mode_residuals(&op)?,
                    iterations: alpha.iterations,
                },
            };
            dir.append_report(&line)?;
            lines.push(line);
        }
    }
    Ok(Outcome {
        checks: checks(&cfg.epsilons(), &lines),
        ..Outcome::default()
    })
}

fn checks(epsilons: &[f64], lines: &[SpectralLine]) -> Vec<Check> {
    let at = |eps: f64| lines.iter().filter(move |l| l.report.epsilon == eps);
    let gap = |eps: f64| -max_of(at(eps).map(|l| -l.report.alpha));
    let ratio = |eps: f64| max_of(at(eps).map(|l| l.unprojected / l.report.alpha));
    let mut checks = vec![Check::at_least(
        "alpha_positive",
        -max_of(lines.iter().map(|l| -l.report.alpha)),
        f64::MIN_POSITIVE,
    )];
    if epsilons.len() > 1 {
        let (coarse, fine) = (epsilons[0], epsilons[epsilons.len() - 1]);
        let predicted = coarse.ln() / fine.ln();
        checks.push(Check::within(
            "alpha_trend",
            gap(fine) / gap(coarse) / predicted,
            Some(1.0 - TREND_SLACK),
            Some(1.0 + TREND_SLACK),
        ));
        let ratios: Vec<f64> = epsilons.iter().map(|&e| ratio(e)).collect();
        checks.push(Check::at_most("unprojected_collapse", max_of(ratios.iter().copied()), COLLAPSE_FRACTION));
        checks.push(Check::at_most("collapse_monotone", increases(&ratios), 0.0));
    }
    checks
}

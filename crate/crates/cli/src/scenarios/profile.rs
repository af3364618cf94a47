//! Radial profile solve and its estimates at every `eps` of the sweep.

use std::f64::consts::PI;

use glvortex_core::io::save_profile;
use glvortex_core::{solve_profile, RadialProfile};
use serde::{Deserialize, Serialize};

use super::{max_of, Outcome};
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::output::{Check, RunDir};

pub const MAX_RESIDUAL: f64 = 1e-10;
pub const FAR_FIELD: f64 = 0.1;
pub const CORE: f64 = 0.05;
/// Bound on `eps^-2 int (1 - |psi|^2)^2`.
pub const POTENTIAL_BOUND: f64 = 7.0;
/// Bound on `eps |grad psi|_inf`.
pub const GRADIENT_BOUND: f64 = 1.0;
/// Relative spread of `E - pi |log eps|` over the sweep.
pub const EXCESS_SPREAD: f64 = 0.15;
pub const EXCESS_BOUND: f64 = 5.0;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProfileRecord {
    pub epsilon: f64,
    pub residual: f64,
    pub newton_iterations: usize,
    pub energy: f64,
    /// `E - pi |log eps|` on the disc.
    pub excess: f64,
    pub kinetic: f64,
    pub potential: f64,
    /// `int |d_1 psi|^2` on the disc.
    pub stiffness: f64,
    /// Samples violating `0 <= phi <= 1` or monotonicity.
    pub shape_violations: usize,
    /// `max |phi - (1 - eps^2/(2 r^2))| / (1 - phi)` over `r in [0.5, 0.9]`.
    pub far_field_error: f64,
    /// `max |phi - (r/eps - r^3/(8 eps^3))| / phi` over `r in (0, eps/2]`.
    pub core_error: f64,
    /// `max_R sup_{r >= R} |phi(r) - phi(R)| / (eps^2/R^2)` over `R in {0.25, 0.5}`.
    pub oscillation_ratio: f64,
    pub gradient_bound: f64,
}

fn max_over(rs: impl Iterator<Item = f64>, f: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for r in rs {
        worst = worst.max(f(r)?);
    }
    Ok(worst)
}

pub fn measure(p: &RadialProfile, disc_radius: f64) -> Result<ProfileRecord> {
    let eps = p.epsilon;
    let parts = p.planar_energy_parts(disc_radius)?;
    let shape_violations = p.phi.iter().filter(|v| !(0.0..=1.0).contains(*v)).count()
        + p.phi.windows(2).filter(|w| w[1] < w[0]).count();
    let far_field_error = max_over((0..=40).map(|k| 0.5 + 0.01 * k as f64), |r| {
        let phi = p.eval(r)?;
        Ok((phi - (1.0 - eps * eps / (2.0 * r * r))).abs() / (1.0 - phi).abs())
    })?;
    let core_error = max_over((1..=20).map(|k| k as f64 * eps / 40.0), |r| {
        let phi = p.eval(r)?;
        Ok((phi - (r / eps - r.powi(3) / (8.0 * eps.powi(3)))).abs() / phi)
    })?;
    let mut oscillation_ratio: f64 = 0.0;
    for big_r in [0.25, 0.5] {
        let base = p.eval(big_r)?;
        let worst = max_over((0..=20).map(|k| big_r + k as f64 * (disc_radius - big_r) / 20.0), |r| {
            Ok((p.eval(r)? - base).abs())
        })?;
        oscillation_ratio = oscillation_ratio.max(worst * big_r * big_r / (eps * eps));
    }
    Ok(ProfileRecord {
        epsilon: eps,
        residual: p.residual,
        newton_iterations: p.newton_iterations,
        energy: parts.total(),
        excess: parts.total() - PI * eps.ln().abs(),
        kinetic: parts.kinetic,
        potential: parts.potential,
        stiffness: p.translation_stiffness(disc_radius)?,
        shape_violations,
        far_field_error,
        core_error,
        oscillation_ratio,
        gradient_bound: eps * p.max_gradient(),
    })
}

pub fn run(cfg: &ExperimentConfig, dir: &RunDir) -> Result<Outcome> {
    std::fs::create_dir_all(dir.path("profiles"))?;
    let mut records = Vec::new();
    for eps in cfg.epsilons() {
        let p = solve_profile(eps, cfg.profile_radius(), cfg.profile_samples)?;
        save_profile(&dir.path("profiles").join(format!("eps_{eps}.glp")), &p)?;
        let rec = measure(&p, cfg.disc_radius)?;
        dir.append_report(&rec)?;
        records.push(rec);
    }
    let mut checks = Vec::new();
    for r in &records {
        let e = r.epsilon;
        checks.push(Check::at_most(format!("residual@{e}"), r.residual, MAX_RESIDUAL));
        checks.push(Check::at_most(format!("shape@{e}"), r.shape_violations as f64, 0.0));
        checks.push(Check::at_most(format!("potential@{e}"), 4.0 * r.potential, POTENTIAL_BOUND));
        checks.push(Check::at_most(format!("gradient@{e}"), r.gradient_bound, GRADIENT_BOUND));
        checks.push(Check::at_most(format!("oscillation@{e}"), r.oscillation_ratio, 1.0));
        if e == cfg.epsilon {
            checks.push(Check::at_most("far_field", r.far_field_error, FAR_FIELD));
            checks.push(Check::at_most("core_expansion", r.core_error, CORE).informational());
        }
    }
    if records.len() > 1 {
        let excess: Vec<f64> = records.iter().map(|r| r.excess).collect();
        let hi = max_of(excess.iter().copied());
        let lo = -max_of(excess.iter().map(|v| -v));
        checks.push(Check::at_most("energy_excess_spread", (hi - lo) / excess[0].abs(), EXCESS_SPREAD));
        checks.push(Check::within("energy_excess_bounds", lo, Some(0.0), None));
        checks.push(Check::within("energy_excess_max", hi, None, Some(EXCESS_BOUND)));
    }
    Ok(Outcome {
        checks,
        ..Outcome::default()
    })
}

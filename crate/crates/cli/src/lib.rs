//! Scenario runner for the glvortex laboratory: strict JSON configuration,
//! reproducible run directories, checkpoint/resume and per-check manifests.

pub mod config;
pub mod error;
pub mod output;
pub mod perturbation;
pub mod scenarios;

use std::path::PathBuf;

pub use config::ExperimentConfig;
pub use error::{CliError, Result};
pub use output::{Check, FailureRecord, Manifest, RunDir, Status};
pub use scenarios::{Control, Scenario};

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub scenario: Scenario,
    pub config: ExperimentConfig,
    pub out: PathBuf,
    pub resume: Option<PathBuf>,
    /// Overrides the configured observation stride.
    pub stride: Option<u64>,
    pub stop_after: Option<u64>,
}

/// Runs a scenario and writes its manifest. Scenario failures are recorded
/// in the manifest (status `error`); only failures to create the run
/// directory or write the manifest are returned as errors.
pub fn run(opts: RunOptions) -> Result<Manifest> {
    let mut cfg = opts.config;
    if let Some(s) = opts.stride {
        cfg.observe_stride = s;
    }
    let dir = RunDir::create(&opts.out)?;
    let mut manifest = Manifest::new(opts.scenario.name(), &cfg);
    let ctl = Control {
        resume: opts.resume,
        stop_after: opts.stop_after,
    };
    let result = cfg.validate().and_then(|_| {
        if ctl.resume.is_none() {
            dir.reset()?;
        }
        scenarios::execute(opts.scenario, &cfg, &dir, &ctl)
    });
    match result {
        Ok(outcome) => {
            manifest.steps = outcome.steps;
            manifest.resumed_at_step = outcome.resumed_at_step;
            manifest.set_checks(outcome.checks);
            if outcome.stopped {
                manifest.status = Status::Stopped;
            }
        }
        Err(e) => {
            manifest.status = Status::Error;
            manifest.error = Some(FailureRecord {
                kind: e.kind().into(),
                message: e.to_string(),
            });
        }
    }
    dir.write_manifest(&manifest)?;
    Ok(manifest)
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use glvortex_cli::{run, ExperimentConfig, RunOptions, Scenario, Status};

/// Ginzburg-Landau vortex filament experiments.
#[derive(Debug, Parser)]
#[command(name = "glvortex", version)]
struct Cli {
    scenario: Scenario,
    /// Experiment configuration (strict JSON).
    #[arg(long)]
    config: PathBuf,
    /// Run directory.
    #[arg(long)]
    out: PathBuf,
    /// Continue from a checkpoint written by an earlier run of the same
    /// configuration into the same directory.
    #[arg(long)]
    resume: Option<PathBuf>,
    /// Observation stride in steps, overriding the configuration.
    #[arg(long)]
    stride: Option<u64>,
    /// Stop with a checkpoint once this step is reached.
    #[arg(long)]
    stop_after: Option<u64>,
}

fn fail(kind: &str, message: String) -> ExitCode {
    let record = serde_json::json!({ "status": "error", "kind": kind, "message": message });
    eprintln!("{record}");
    ExitCode::from(Status::Error.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail("usage", e.to_string()),
    };
    let config = match ExperimentConfig::load(&cli.config) {
        Ok(c) => c,
        Err(e) => return fail(e.kind(), e.to_string()),
    };
    let opts = RunOptions {
        scenario: cli.scenario,
        config,
        out: cli.out,
        resume: cli.resume,
        stride: cli.stride,
        stop_after: cli.stop_after,
    };
    match run(opts) {
        Ok(manifest) => {
            println!("{} {}", manifest.scenario, serde_json::to_string(&manifest.status).unwrap_or_default());
            for c in &manifest.checks {
                let mark = if c.passed { "pass" } else if c.gating { "FAIL" } else { "info" };
                println!("  {mark:4} {:32} {:.6e}", c.name, c.value);
            }
            if let Some(err) = &manifest.error {
                eprintln!("{}: {}", err.kind, err.message);
            }
            ExitCode::from(manifest.status.exit_code() as u8)
        }
        Err(e) => fail(e.kind(), e.to_string()),
    }
}

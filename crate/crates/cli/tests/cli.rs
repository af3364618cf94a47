use std::fs;
use std::path::Path;
use std::process::Command;

use glvortex_cli::output::{Check, Manifest};
use glvortex_cli::{run, ExperimentConfig, RunOptions, Scenario, Status};
use proptest::prelude::*;

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let path = dir.join("config.json");
    fs::write(&path, text).unwrap();
    path
}

fn glvortex(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_glvortex")).args(args).output().unwrap()
}

#[test]
fn config_is_strict() {
    assert!(ExperimentConfig::from_json(r#"{"epsilon": 0.1, "colour": 1}"#).is_err());
    assert!(ExperimentConfig::from_json(r#"{"epsilon": -0.1}"#).is_err());
    assert!(ExperimentConfig::from_json(r#"{"epsilon": 0.1, "observe_stride": 0}"#).is_err());
    assert!(ExperimentConfig::from_json(r#"{"epsilon": 0.1, "observe_stride": 3, "checkpoint_stride": 10}"#).is_err());
    assert!(ExperimentConfig::from_json(r#"{"epsilon": 0.1, "dt": 0.01}"#).is_err());
    // Resolution h_x <= eps/4: 81 nodes on [-1, 1] give exactly eps/4 at eps = 0.1.
    assert!(ExperimentConfig::from_json(r#"{"epsilon": 0.1, "n_x": 41}"#).is_err());
    assert!(ExperimentConfig::from_json(r#"{"epsilon": 0.1, "n_x": 81}"#).is_ok());
    // Initial moduli must lie in the delta ball.
    let big = r#"{"epsilon": 0.1, "delta": 0.5, "modes": [{"amplitude": 0.1, "wavenumber": 1}]}"#;
    assert!(ExperimentConfig::from_json(big).is_err());
}

#[test]
fn defaults_and_hash() {
    let a = ExperimentConfig::from_json(r#"{"epsilon": 0.1}"#).unwrap();
    let b = ExperimentConfig::from_json(r#"{"epsilon": 0.1, "n_z": 8, "disc_radius": 1.0}"#).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.hash(), b.hash());
    assert!((a.dt() - 0.0025).abs() < 1e-15);
    let c = ExperimentConfig::from_json(r#"{"epsilon": 0.1, "seed": 1}"#).unwrap();
    assert_ne!(a.hash(), c.hash());
    assert_eq!(a.hash().len(), 64);
}

#[test]
fn epsilons_are_sorted_and_deduplicated() {
    let cfg = ExperimentConfig::from_json(r#"{"epsilon": 0.1, "sweep": [0.05, 0.2, 0.1]}"#).unwrap();
    assert_eq!(cfg.epsilons(), vec![0.2, 0.1, 0.05]);
}

#[test]
fn checks_treat_non_finite_values_as_failures() {
    assert!(Check::at_most("x", 0.5, 1.0).passed);
    assert!(!Check::at_most("x", f64::NAN, 1.0).passed);
    assert!(!Check::at_least("x", f64::INFINITY, 1.0).passed);
    assert!(!Check::within("x", 2.0, Some(0.0), Some(1.0)).passed);
    let c = Check::at_most("x", f64::NAN, 1.0);
    let back: Check = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
    assert!(back.value.is_nan() && !back.passed);
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let out_s = out.to_str().unwrap();

    let good = write_config(dir.path(), r#"{"epsilon": 0.05}"#);
    let o = glvortex(&["profile", "--config", good.to_str().unwrap(), "--out", out_s]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let manifest: Manifest = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest.status, Status::Passed);
    assert_eq!(manifest.code_version, env!("CARGO_PKG_VERSION"));
    assert!(manifest.tolerances.contains_key("far_field"));

    let bad = write_config(dir.path(), r#"{"epsilon": 0.2, "unknown": true}"#);
    let o = glvortex(&["profile", "--config", bad.to_str().unwrap(), "--out", out_s]);
    assert_eq!(o.status.code(), Some(3));
    let record: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(record["kind"], "config");

    // A stationary scenario with a curved filament is a configuration error
    // recorded in the manifest.
    let curved = write_config(
        dir.path(),
        r#"{"epsilon": 0.2, "t_final": 0.02, "modes": [{"amplitude": 0.01, "wavenumber": 1}]}"#,
    );
    let o = glvortex(&["stationary", "--config", curved.to_str().unwrap(), "--out", out_s]);
    assert_eq!(o.status.code(), Some(3));
    let manifest: Manifest = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest.status, Status::Error);
    assert_eq!(manifest.error.unwrap().kind, "config");

    let o = glvortex(&["nonsense", "--config", good.to_str().unwrap(), "--out", out_s]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn failed_checks_exit_with_two() {
    // At eps = 0.25 the far-field asymptotics do not yet hold on [0.5, 0.9].
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"epsilon": 0.25}"#);
    let out = dir.path().join("run");
    let o = glvortex(&["profile", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let manifest: Manifest = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert!(!manifest.check("far_field").unwrap().passed);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn stationary_run_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::from_json(
        r#"{"epsilon": 0.2, "t_final": 0.1, "observe_stride": 2, "checkpoint_stride": 4}"#,
    )
    .unwrap();
    let m = run(RunOptions {
        scenario: Scenario::Stationary,
        config: cfg,
        out: dir.path().to_path_buf(),
        resume: None,
        stride: Some(5),
        stop_after: None,
    })
    .unwrap();
    // The stride override is part of the hashed configuration; the
    // checkpoint stride 4 is no longer a multiple of it.
    assert_eq!(m.status, Status::Error);

    let cfg = ExperimentConfig::from_json(r#"{"epsilon": 0.2, "t_final": 0.1, "checkpoint_stride": 5}"#).unwrap();
    let m = run(RunOptions {
        scenario: Scenario::Stationary,
        config: cfg,
        out: dir.path().to_path_buf(),
        resume: None,
        stride: Some(5),
        stop_after: None,
    })
    .unwrap();
    assert_eq!(m.config.observe_stride, 5);
    assert_eq!(m.steps, 10);
    let lines = fs::read_to_string(dir.path().join("trajectory.jsonl")).unwrap();
    let steps: Vec<u64> = lines
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["step"].as_u64().unwrap())
        .collect();
    assert_eq!(steps, vec![0, 5, 10]);
    let csv = fs::read_to_string(dir.path().join("curves.csv")).unwrap();
    assert!(csv.starts_with("t,z_j,gamma1,gamma2\n"));
    assert_eq!(csv.lines().count(), 1 + 3 * 8);
    assert!(dir.path().join("checkpoints/step_00000005.glf").exists());
    assert!(dir.path().join("checkpoints/step_00000010.glf").exists());
    assert!(m.check("energy_drift").unwrap().passed);
}

#[test]
fn resume_rejects_foreign_checkpoints() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::from_json(r#"{"epsilon": 0.2, "t_final": 0.04, "checkpoint_stride": 2}"#).unwrap();
    let opts = |cfg: ExperimentConfig, resume: Option<std::path::PathBuf>| RunOptions {
        scenario: Scenario::Stationary,
        config: cfg,
        out: dir.path().to_path_buf(),
        resume,
        stride: None,
        stop_after: None,
    };
    run(opts(cfg.clone(), None)).unwrap();
    let ck = dir.path().join("checkpoints/step_00000002.glf");
    let mut other = cfg.clone();
    other.seed = 9;
    let m = run(opts(other, Some(ck.clone()))).unwrap();
    assert_eq!(m.status, Status::Error);
    assert_eq!(m.error.unwrap().kind, "resume");
    let m = run(RunOptions {
        scenario: Scenario::Profile,
        ..opts(cfg.clone(), Some(ck.clone()))
    })
    .unwrap();
    assert_eq!(m.status, Status::Error);
    let m = run(opts(cfg, Some(ck))).unwrap();
    assert_eq!(m.resumed_at_step, Some(2));
    assert_ne!(m.status, Status::Error);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn config_round_trips_through_json(
        eps in 0.05f64..0.25,
        a in 0.0f64..1e-3,
        k in -3i64..=3,
        phase in -3.0f64..3.0,
        seed in any::<u64>(),
    ) {
        let text = serde_json::json!({
            "epsilon": eps,
            "modes": [{"amplitude": a, "wavenumber": k, "phase": phase}],
            "seed": seed,
        })
        .to_string();
        let cfg = ExperimentConfig::from_json(&text).unwrap();
        let back = ExperimentConfig::from_json(&serde_json::to_string(&cfg).unwrap()).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.hash(), cfg.hash());
        prop_assert!(cfg.grid_spec(eps).unwrap().h_x() <= eps / 4.0 * (1.0 + 1e-12));
    }
}

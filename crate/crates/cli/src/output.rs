//! Run directory layout: `manifest.json`, `trajectory.jsonl`, `curves.csv`,
//! `reports.jsonl` and `checkpoints/step_NNNNNNNN.glf`.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use glvortex_core::Curve;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};

pub const TRAJECTORY: &str = "trajectory.jsonl";
pub const REPORTS: &str = "reports.jsonl";
pub const CURVES: &str = "curves.csv";
pub const MANIFEST: &str = "manifest.json";
const CURVES_HEADER: &str = "t,z_j,gamma1,gamma2";

fn null_as_nan<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

/// One pass/fail comparison of a measured value against pinned bounds.
/// Non-gating checks are recorded but do not affect the exit status.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// Non-finite values serialize as `null` and fail.
    #[serde(deserialize_with = "null_as_nan")]
    pub value: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub passed: bool,
    pub gating: bool,
}

impl Check {
    pub fn within(name: impl Into<String>, value: f64, lower: Option<f64>, upper: Option<f64>) -> Self {
        let passed = value.is_finite()
            && lower.map_or(true, |l| value >= l)
            && upper.map_or(true, |u| value <= u);
        Self {
            name: name.into(),
            value,
            lower,
            upper,
            passed,
            gating: true,
        }
    }

    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self::within(name, value, None, Some(bound))
    }

    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self::within(name, value, Some(bound), None)
    }

    pub fn informational(mut self) -> Self {
        self.gating = false;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Passed,
    Failed,
    /// Stopped early at a checkpoint on request.
    Stopped,
    Error,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Passed | Status::Stopped => 0,
            Status::Failed => 2,
            Status::Error => 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub kind: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub scenario: String,
    pub status: Status,
    pub config_hash: String,
    pub code_version: String,
    pub config: ExperimentConfig,
    pub tolerances: BTreeMap<String, Bounds>,
    pub checks: Vec<Check>,
    pub steps: u64,
    pub resumed_at_step: Option<u64>,
    pub error: Option<FailureRecord>,
}

impl Manifest {
    pub fn new(scenario: &str, config: &ExperimentConfig) -> Self {
        Self {
            scenario: scenario.into(),
            status: Status::Passed,
            config_hash: config.hash(),
            code_version: env!("CARGO_PKG_VERSION").into(),
            config: config.clone(),
            tolerances: BTreeMap::new(),
            checks: Vec::new(),
            steps: 0,
            resumed_at_step: None,
            error: None,
        }
    }

    pub fn set_checks(&mut self, checks: Vec<Check>) {
        self.tolerances = checks
            .iter()
            .map(|c| {
                let b = Bounds {
                    lower: c.lower,
                    upper: c.upper,
                };
                (c.name.clone(), b)
            })
            .collect();
        self.status = if checks.iter().all(|c| c.passed || !c.gating) {
            Status::Passed
        } else {
            Status::Failed
        };
        self.checks = checks;
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub struct RunDir {
    root: PathBuf,
}

fn malformed(file: &Path, reason: impl ToString) -> CliError {
    CliError::Output {
        file: file.display().to_string(),
        reason: reason.to_string(),
    }
}

impl RunDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root.join("checkpoints"))?;
        Ok(Self { root: root.to_path_buf() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn checkpoint_path(&self, step: u64) -> PathBuf {
        self.root.join("checkpoints").join(format!("step_{step:08}.glf"))
    }

    /// Empties the record files of a fresh run.
    pub fn reset(&self) -> Result<()> {
        File::create(self.path(TRAJECTORY))?;
        File::create(self.path(REPORTS))?;
        fs::write(self.path(CURVES), format!("{CURVES_HEADER}\n"))?;
        Ok(())
    }

    /// Drops records written after `step` (time `time`) by an interrupted
    /// run, so that a resumed run appends exactly what an unsplit run would.
    pub fn truncate_after(&self, step: u64, time: f64) -> Result<()> {
        for name in [TRAJECTORY, REPORTS] {
            let path = self.path(name);
            if !path.exists() {
                File::create(&path)?;
                continue;
            }
            let mut kept = String::new();
            for line in fs::read_to_string(&path)?.lines() {
                let v: serde_json::Value = serde_json::from_str(line).map_err(|e| malformed(&path, e))?;
                if v.get("step").and_then(|s| s.as_u64()).map_or(true, |s| s <= step) {
                    kept.push_str(line);
                    kept.push('\n');
                }
            }
            fs::write(&path, kept)?;
        }
        let path = self.path(CURVES);
        let mut kept = format!("{CURVES_HEADER}\n");
        if path.exists() {
            for line in fs::read_to_string(&path)?.lines().skip(1) {
                let t: f64 = line
                    .split(',')
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| malformed(&path, format!("bad row {line:?}")))?;
                if t <= time {
                    kept.push_str(line);
                    kept.push('\n');
                }
            }
        }
        fs::write(&path, kept)?;
        Ok(())
    }

    fn append_line(&self, name: &str, line: &str) -> Result<()> {
        let mut f = OpenOptions::new().create(true).append(true).open(self.path(name))?;
        writeln!(f, "{line}")?;
        Ok(())
    }

    pub fn append_trajectory(&self, record: &impl Serialize) -> Result<()> {
        self.append_line(TRAJECTORY, &serde_json::to_string(record)?)
    }

    pub fn append_report(&self, record: &impl Serialize) -> Result<()> {
        self.append_line(REPORTS, &serde_json::to_string(record)?)
    }

    pub fn append_curve(&self, t: f64, curve: &Curve) -> Result<()> {
        let n = curve.n_z();
        let rows: Vec<String> = curve
            .points
            .iter()
            .enumerate()
            .map(|(j, p)| format!("{t},{},{},{}", j as f64 / n as f64, p[0], p[1]))
            .collect();
        self.append_line(CURVES, &rows.join("\n"))
    }

    fn read_jsonl<T: DeserializeOwned>(&self, name: &str) -> Result<Vec<T>> {
        let path = self.path(name);
        let file = File::open(&path)?;
        BufReader::new(file)
            .lines()
            .map(|line| {
                let line = line?;
                serde_json::from_str(&line).map_err(|e| malformed(&path, e))
            })
            .collect()
    }

    pub fn read_trajectory<T: DeserializeOwned>(&self) -> Result<Vec<T>> {
        self.read_jsonl(TRAJECTORY)
    }

    pub fn read_reports<T: DeserializeOwned>(&self) -> Result<Vec<T>> {
        self.read_jsonl(REPORTS)
    }

    pub fn write_manifest(&self, manifest: &Manifest) -> Result<()> {
        let mut text = serde_json::to_string_pretty(manifest)?;
        text.push('\n');
        fs::write(self.path(MANIFEST), text)?;
        Ok(())
    }

    pub fn read_manifest(&self) -> Result<Manifest> {
        let path = self.path(MANIFEST);
        serde_json::from_str(&fs::read_to_string(&path)?).map_err(|e| malformed(&path, e))
    }
}

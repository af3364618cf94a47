//! Strict JSON experiment configuration.

use std::fs;
use std::path::Path;

use glvortex_core::{Curve, CurveMode, GridSpec, Moduli, TestFunction, TestVectorField};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

fn default_disc_radius() -> f64 {
    1.0
}

fn default_n_z() -> usize {
    8
}

fn default_profile_samples() -> usize {
    4096
}

fn default_delta() -> f64 {
    1.0
}

fn default_stride() -> u64 {
    1
}

fn default_delta_exponent() -> f64 {
    1.5
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub epsilon: f64,
    #[serde(default = "default_disc_radius")]
    pub disc_radius: f64,
    /// Nodes per axis; defaults to the coarsest grid with `h_x <= eps/4`.
    #[serde(default)]
    pub n_x: Option<usize>,
    #[serde(default = "default_n_z")]
    pub n_z: usize,
    #[serde(default = "default_profile_samples")]
    pub profile_samples: usize,
    /// Bound on `|lambda| + ||gamma||_{C^2}` of the initial moduli.
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub lambda: f64,
    #[serde(default)]
    pub modes: Vec<CurveMode>,
    /// `X^2` size of the initial offset from the filament manifold.
    #[serde(default)]
    pub perturbation: f64,
    /// Defaults to `eps^2 / 4`.
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub t_final: f64,
    #[serde(default = "default_stride")]
    pub observe_stride: u64,
    /// Must be a multiple of `observe_stride`.
    #[serde(default)]
    pub checkpoint_stride: Option<u64>,
    #[serde(default)]
    pub seed: u64,
    /// Extra `eps` values for the profile, concentration and spectral sweeps.
    #[serde(default)]
    pub sweep: Vec<f64>,
    /// Spectral samples use `delta = eps^p`.
    #[serde(default = "default_delta_exponent")]
    pub spectral_delta_exponent: f64,
    /// Concentration test fields; default `X = e_3`, `phi = 1`.
    #[serde(default)]
    pub vector_field: Option<TestVectorField>,
    #[serde(default)]
    pub scalar_field: Option<TestFunction>,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| invalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("epsilon", self.epsilon),
            ("disc_radius", self.disc_radius),
            ("delta", self.delta),
            ("spectral_delta_exponent", self.spectral_delta_exponent),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} = {v} must be positive")));
            }
        }
        let non_negative = [("perturbation", self.perturbation), ("t_final", self.t_final)];
        for (name, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} = {v} must be non-negative")));
            }
        }
        if !self.lambda.is_finite() {
            return Err(invalid("lambda must be finite"));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt <= 0.5 * self.epsilon * self.epsilon) {
                return Err(invalid(format!("dt = {dt} must lie in (0, eps^2/2]")));
            }
        }
        if self.observe_stride == 0 {
            return Err(invalid("observe_stride must be positive"));
        }
        if let Some(c) = self.checkpoint_stride {
            if c == 0 || c % self.observe_stride != 0 {
                return Err(invalid(format!(
                    "checkpoint_stride = {c} must be a positive multiple of observe_stride = {}",
                    self.observe_stride
                )));
            }
        }
        if self.profile_samples < 512 {
            return Err(invalid("profile_samples must be at least 512"));
        }
        for m in &self.modes {
            if !(m.amplitude >= 0.0 && m.amplitude.is_finite() && m.phase.is_finite()) {
                return Err(invalid(format!("invalid curve mode {m:?}")));
            }
        }
        for eps in self.epsilons() {
            self.grid_spec(eps)?;
        }
        let sigma = self.initial_moduli();
        if sigma.y2_norm() > self.delta {
            return Err(invalid(format!(
                "initial moduli have |lambda| + |gamma|_C2 = {} > delta = {}",
                sigma.y2_norm(),
                self.delta
            )));
        }
        Ok(())
    }

    /// The configured `eps` followed by the sweep values, largest first,
    /// without duplicates.
    pub fn epsilons(&self) -> Vec<f64> {
        let mut all = vec![self.epsilon];
        all.extend(&self.sweep);
        all.sort_by(|a, b| b.total_cmp(a));
        all.dedup();
        all
    }

    /// Grid for a given `eps`; the explicit `n_x` applies to the configured
    /// `eps` only.
    pub fn grid_spec(&self, eps: f64) -> Result<GridSpec> {
        if !(eps > 0.0 && eps <= 0.25) {
            return Err(invalid(format!("epsilon {eps} out of range (0, 0.25]")));
        }
        let spec = match self.n_x {
            Some(n) if eps == self.epsilon => GridSpec::new(self.disc_radius, n, self.n_z)?,
            _ => GridSpec::resolving(eps, self.disc_radius, self.n_z)?,
        };
        if spec.h_x() > 0.25 * eps * (1.0 + 1e-12) {
            return Err(invalid(format!(
                "h_x = {} exceeds eps/4 = {} at eps = {eps}",
                spec.h_x(),
                0.25 * eps
            )));
        }
        Ok(spec)
    }

    pub fn dt(&self) -> f64 {
        self.dt.unwrap_or(0.25 * self.epsilon * self.epsilon)
    }

    /// Profile radial extent covering every shifted evaluation on the disc.
    pub fn profile_radius(&self) -> f64 {
        2.0 * self.disc_radius
    }

    pub fn initial_moduli(&self) -> Moduli {
        Moduli::new(self.lambda, Curve::from_modes(self.n_z, &self.modes))
    }

    pub fn vector_field(&self) -> TestVectorField {
        self.vector_field.unwrap_or(TestVectorField {
            direction: [0.0, 0.0, 1.0],
            profile: TestFunction::Constant { value: 1.0 },
        })
    }

    pub fn scalar_field(&self) -> TestFunction {
        self.scalar_field.unwrap_or(TestFunction::Constant { value: 1.0 })
    }

    /// SHA-256 of the canonical serialization.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
    }
}

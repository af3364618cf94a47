//! Binary checkpoint (`.glf`) and profile cache (`.glp`) files: one JSON
//! header line, a newline, then raw little-endian `f64` payload. The header
//! carries a schema version and the SHA-256 of the payload.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dynamics::EvolutionState;
use crate::error::{Error, Result};
use crate::grid::{ComplexField, Grid, GridSpec};
use crate::profile::RadialProfile;

pub const CHECKPOINT_VERSION: u32 = 1;
pub const PROFILE_CACHE_VERSION: u32 = 1;

fn digest(payload: &[u8]) -> String {
    Sha256::digest(payload).iter().map(|b| format!("{b:02x}")).collect()
}

fn encode(header: &impl Serialize, payload: &[u8]) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec(header)?;
    out.push(b'\n');
    out.extend_from_slice(payload);
    Ok(out)
}

/// Splits `bytes` into header JSON and payload.
fn split(bytes: &[u8]) -> Result<(&[u8], &[u8])> {
    let nl = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::Checkpoint("missing header line".into()))?;
    Ok((&bytes[..nl], &bytes[nl + 1..]))
}

fn f64s_to_bytes(values: impl Iterator<Item = f64>) -> Vec<u8> {
    values.flat_map(|v| v.to_le_bytes()).collect()
}

fn bytes_to_f64s(payload: &[u8]) -> Vec<f64> {
    payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect()
}

/// Header fields common to both formats, checked before anything else.
#[derive(Deserialize)]
struct Envelope {
    format: String,
    version: u32,
    sha256: String,
    payload_bytes: usize,
}

fn verify(header: &[u8], payload: &[u8], format: &str, version: u32) -> Result<()> {
    let env: Envelope = serde_json::from_slice(header)
        .map_err(|e| Error::Checkpoint(format!("unreadable header: {e}")))?;
    if env.format != format {
        return Err(Error::Checkpoint(format!("expected format {format}, found {}", env.format)));
    }
    if env.version != version {
        return Err(Error::SchemaVersion {
            found: env.version,
            expected: version,
        });
    }
    if env.payload_bytes != payload.len() {
        return Err(Error::Checkpoint(format!(
            "payload is {} bytes, header says {}",
            payload.len(),
            env.payload_bytes
        )));
    }
    if digest(payload) != env.sha256 {
        return Err(Error::Checkpoint("payload checksum mismatch".into()));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckpointHeader {
    pub format: String,
    pub version: u32,
    pub grid: GridSpec,
    pub epsilon: f64,
    pub time: f64,
    pub step_count: u64,
    pub energy_initial: f64,
    /// Caller metadata (run configuration, tracked moduli).
    #[serde(default)]
    pub extra: serde_json::Value,
    pub sha256: String,
    pub payload_bytes: usize,
}

#[derive(Clone, Debug)]
pub struct Checkpoint {
    pub state: EvolutionState,
    pub epsilon: f64,
    pub extra: serde_json::Value,
}

/// Serializes an evolution state; values are `(re, im)` pairs in node order
/// `(i_x1, i_x2, i_z)`.
pub fn encode_checkpoint(state: &EvolutionState, epsilon: f64, extra: &serde_json::Value) -> Result<Vec<u8>> {
    let payload = f64s_to_bytes(state.field.values().iter().flat_map(|c| [c.re, c.im]));
    let header = CheckpointHeader {
        format: "glf".into(),
        version: CHECKPOINT_VERSION,
        grid: *state.field.grid().spec(),
        epsilon,
        time: state.time,
        step_count: state.step_count,
        energy_initial: state.energy_initial,
        extra: extra.clone(),
        sha256: digest(&payload),
        payload_bytes: payload.len(),
    };
    encode(&header, &payload)
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<Checkpoint> {
    let (head, payload) = split(bytes)?;
    verify(head, payload, "glf", CHECKPOINT_VERSION)?;
    let header: CheckpointHeader = serde_json::from_slice(head)?;
    let grid = Grid::new(header.grid)?;
    let raw = bytes_to_f64s(payload);
    if raw.len() != 2 * grid.len() {
        return Err(Error::Checkpoint(format!(
            "payload holds {} values, grid needs {}",
            raw.len(),
            2 * grid.len()
        )));
    }
    let values = raw.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect();
    let field = ComplexField::from_values(&grid, values)?;
    Ok(Checkpoint {
        state: EvolutionState {
            field,
            time: header.time,
            step_count: header.step_count,
            energy_initial: header.energy_initial,
        },
        epsilon: header.epsilon,
        extra: header.extra,
    })
}

/// Writes atomically through a temporary sibling file.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("partial");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn save_checkpoint(
    path: &Path,
    state: &EvolutionState,
    epsilon: f64,
    extra: &serde_json::Value,
) -> Result<()> {
    write_atomic(path, &encode_checkpoint(state, epsilon, extra)?)
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    decode_checkpoint(&fs::read(path)?)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileHeader {
    format: String,
    version: u32,
    epsilon: f64,
    r_max: f64,
    samples: usize,
    residual: f64,
    newton_iterations: usize,
    sha256: String,
    payload_bytes: usize,
}

/// Payload: `r_samples`, then `phi`, then `phi_prime`.
pub fn encode_profile(p: &RadialProfile) -> Result<Vec<u8>> {
    let payload = f64s_to_bytes(
        p.r_samples
            .iter()
            .chain(&p.phi)
            .chain(&p.phi_prime)
            .copied(),
    );
    let header = ProfileHeader {
        format: "glp".into(),
        version: PROFILE_CACHE_VERSION,
        epsilon: p.epsilon,
        r_max: p.r_max,
        samples: p.r_samples.len(),
        residual: p.residual,
        newton_iterations: p.newton_iterations,
        sha256: digest(&payload),
        payload_bytes: payload.len(),
    };
    encode(&header, &payload)
}

pub fn decode_profile(bytes: &[u8]) -> Result<RadialProfile> {
    let (head, payload) = split(bytes)?;
    verify(head, payload, "glp", PROFILE_CACHE_VERSION)?;
    let h: ProfileHeader = serde_json::from_slice(head)?;
    let raw = bytes_to_f64s(payload);
    let n = h.samples;
    if raw.len() != 3 * n {
        return Err(Error::Checkpoint(format!("profile payload holds {} values, expected {}", raw.len(), 3 * n)));
    }
    Ok(RadialProfile {
        epsilon: h.epsilon,
        r_max: h.r_max,
        r_samples: raw[..n].to_vec(),
        phi: raw[n..2 * n].to_vec(),
        phi_prime: raw[2 * n..].to_vec(),
        residual: h.residual,
        newton_iterations: h.newton_iterations,
    })
}

pub fn save_profile(path: &Path, p: &RadialProfile) -> Result<()> {
    write_atomic(path, &encode_profile(p)?)
}

pub fn load_profile(path: &Path) -> Result<RadialProfile> {
    decode_profile(&fs::read(path)?)
}

/// Loads the cached profile if it matches `(epsilon, r_max, n)` exactly,
/// otherwise solves and writes the cache.
pub fn cached_profile(path: &Path, epsilon: f64, r_max: f64, n: usize) -> Result<RadialProfile> {
    if let Ok(p) = load_profile(path) {
        if p.epsilon == epsilon && p.r_max == r_max && p.r_samples.len() == n {
            return Ok(p);
        }
    }
    let p = crate::profile::solve_profile(epsilon, r_max, n)?;
    save_profile(path, &p)?;
    Ok(p)
}

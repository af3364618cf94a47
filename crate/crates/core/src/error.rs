use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),

    #[error("grid mismatch between operands")]
    GridMismatch,

    #[error("invalid Sobolev order {0} (expected 0, 1 or 2)")]
    InvalidSobolevOrder(u32),

    #[error("epsilon {0} out of range (0, 0.25]")]
    EpsilonOutOfRange(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("profile solve failed: {0}")]
    ProfileSolveFailed(String),

    #[error("outside profile range: |x| = {r} > r_max = {r_max}")]
    OutsideProfileRange { r: f64, r_max: f64 },

    #[error("filament too close to boundary: |gamma| = {distance} exceeds {limit}")]
    FilamentTooClose { distance: f64, limit: f64 },

    #[error("singular symplectic block at z-index {0}")]
    SingularBlock(usize),

    #[error("projection lost: {0}")]
    ProjectionLost(String),

    #[error("field has nonzero boundary trace (max |trace| = {0:e})")]
    NonzeroTrace(f64),

    #[error("step failed: {0}")]
    StepFailed(String),

    #[error("integration unhealthy: relative energy drift {drift:e} exceeds {limit:e}")]
    Unhealthy { drift: f64, limit: f64 },

    #[error("graph regime violated: max |gamma_z| = {0}")]
    GraphRegime(f64),

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    EigenNotConverged { iterations: usize, residual: f64 },

    #[error("filament lost at slice {slice}: {reason}")]
    FilamentLost { slice: usize, reason: String },

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("schema version mismatch: found {found}, expected {expected}")]
    SchemaVersion { found: u32, expected: u32 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cannot resume: {0}")]
    Resume(String),

    #[error("malformed output file {file}: {reason}")]
    Output { file: String, reason: String },

    #[error(transparent)]
    Core(#[from] glvortex_core::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// Stable machine-readable tag for failure records.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Config(_) => "config",
            Self::Resume(_) => "resume",
            Self::Output { .. } => "output",
            Self::Core(_) => "numerics",
            Self::Io(_) => "io",
            Self::Json(_) => "json",
        }
    }
}

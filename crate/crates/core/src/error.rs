use thiserror::Error;

/// Errors raised across the crate.
///
/// Variants carry owned strings rather than source errors so results can be
/// compared in tests and sent across worker threads freely.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QdeqError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch{}: {detail}", gate.map(|g| format!(" at gate {g}")).unwrap_or_default())]
    DimensionMismatch { gate: Option<usize>, detail: String },

    #[error("unsupported gate {kind} bound to parameter slot {slot}")]
    UnsupportedGate { slot: usize, kind: String },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("solver diverged at step {step}")]
    SolverDiverged { step: usize },

    #[error("format error: {0}")]
    Format(String),

    #[error("length error: {0}")]
    Length(String),

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("training aborted: {0}")]
    TrainingAborted(String),
}

impl QdeqError {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, err: std::io::Error) -> Self {
        QdeqError::Io {
            path: path.as_ref().display().to_string(),
            message: err.to_string(),
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        QdeqError::InvalidArgument(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, QdeqError>;

use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{kind} id {id} out of range (size {size})")]
    OutOfBounds {
        kind: &'static str,
        id: usize,
        size: usize,
    },

    #[error("format error: {0}")]
    Format(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("parse error at `{field}`: {message}")]
    Schema { field: String, message: String },

    #[error("unsupported pattern: {0}")]
    UnsupportedPattern(String),

    #[error("unsupported operator: {0}")]
    UnsupportedOperator(String),

    #[error("value {0} outside [0, 1]")]
    Domain(f64),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("training diverged: non-finite loss in batch {batch} of epoch {epoch}")]
    TrainingDiverged { epoch: usize, batch: usize },

    #[error("sampling exhausted for pattern {pattern} after {attempts} attempts")]
    SamplingExhausted { pattern: String, attempts: usize },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("unknown {kind} `{name}` (known: {known})")]
    UnknownName {
        kind: &'static str,
        name: String,
        known: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Prefixes an I/O error with the offending path.
pub fn io_at(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

pub(crate) fn check_bounds(kind: &'static str, id: usize, size: usize) -> Result<()> {
    if id < size {
        Ok(())
    } else {
        Err(Error::OutOfBounds { kind, id, size })
    }
}

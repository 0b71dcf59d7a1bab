use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: expected {expected}, found {found}")]
    Dimension { expected: String, found: String },

    #[error("value error: {0}")]
    Value(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("no path between {start:?} and {goal:?}")]
    Unreachable {
        start: (usize, usize),
        goal: (usize, usize),
    },

    #[error("training aborted at epoch {epoch}, step {step}: {message}")]
    Training {
        epoch: usize,
        step: usize,
        message: String,
    },

    #[error("sampling exhausted after {draws} draws ({accepted} accepted, acceptance rate {rate:.4})")]
    SamplingExhausted {
        draws: usize,
        accepted: usize,
        rate: f64,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("stale artifacts for stage `{stage}`: {detail} (rerun with --force)")]
    Stale { stage: String, detail: String },

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },

    #[error("internal error: {0}")]
    Internal(String),
}

/// Coarse classification used for process exit codes and FFI status codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Data,
    Internal,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Config => 2,
            ErrorClass::Data => 3,
            ErrorClass::Internal => 4,
        }
    }
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn in_stage(self, stage: &str) -> Self {
        Error::Stage {
            stage: stage.to_string(),
            source: Box::new(self),
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Config(_) | Error::Stale { .. } => ErrorClass::Config,
            Error::Dimension { .. }
            | Error::Value(_)
            | Error::Shape(_)
            | Error::Contract(_)
            | Error::Unreachable { .. }
            | Error::Training { .. }
            | Error::SamplingExhausted { .. }
            | Error::Parse { .. }
            | Error::Io { .. } => ErrorClass::Data,
            Error::Stage { source, .. } => source.class(),
            Error::Internal(_) => ErrorClass::Internal,
        }
    }
}

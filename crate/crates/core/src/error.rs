use std::path::PathBuf;

use thiserror::Error;

/// Crate-wide error type.
///
/// The variants map onto the CLI exit codes: validation, domain, config and
/// degenerate-input errors exit with 2, infeasible splits with 3, and I/O
/// failures with 4.
#[derive(Debug, Error)]
pub enum Error {
    /// A value outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An inconsistent or unusable configuration.
    #[error("config error: {0}")]
    Config(String),

    /// Structurally invalid input data.
    #[error("validation error: {0}")]
    Validation(String),

    /// Input too small or too uniform for the operation to be meaningful.
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// A split that produced an empty subset; retrying with a new seed may help.
    #[error("infeasible split: {0}")]
    InfeasibleSplit(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {path} at line {line}: {msg}")]
    Parse {
        path: PathBuf,
        line: u64,
        msg: String,
    },

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Exit code the CLI uses for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_)
            | Error::Config(_)
            | Error::Validation(_)
            | Error::DegenerateInput(_) => 2,
            Error::InfeasibleSplit(_) => 3,
            Error::Io { .. } | Error::Parse { .. } | Error::Serde(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

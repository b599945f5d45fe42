use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("size mismatch: expected {expected}, got {actual}")]
    SizeMismatch { expected: usize, actual: usize },

    #[error("duplicate constrained node {0}")]
    DuplicateNode(usize),

    #[error("zero diagonal entry in row {0}")]
    ZeroDiagonal(usize),

    #[error("non-finite value encountered in {0}")]
    NotFinite(&'static str),

    #[error("{solver} breakdown after {iterations} iterations")]
    Breakdown {
        solver: &'static str,
        iterations: usize,
    },

    #[error("{solver} did not converge: residual {residual:e} after {iterations} iterations")]
    NotConverged {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("{missing} of {total} rays found no interface crossing")]
    InterfaceNotFound { missing: usize, total: usize },

    #[error("config line {line}: {key}: {message}")]
    Config {
        line: usize,
        key: String,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

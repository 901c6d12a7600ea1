use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by graph loading, proximity assembly, factorization and evaluation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("edge list {0} contains no edges")]
    EmptyGraph(PathBuf),

    #[error("node {node} out of range for graph with {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    ShapeMismatch(String),

    /// Raised when an internal consistency check fails; indicates a bug rather than bad input.
    #[error("internal consistency violation: {0}")]
    Consistency(String),

    #[error("cannot sample {needed} negative pairs: {reason}")]
    NegativeSampling { needed: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("index {index} out of range (limit {limit})")]
    Index { index: usize, limit: usize },

    /// The Jacobi truncation could not resolve the requested eigenfunctions.
    #[error("truncation error: tail mass {tail_mass:e} of n={n} exceeds tolerance at M={trunc}")]
    Truncation { n: usize, tail_mass: f64, trunc: usize },

    /// An internal cross-check between two numerical routes failed.
    #[error("numerical consistency failure: {what} (spread {spread:e})")]
    Consistency { what: String, spread: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("weighted sum overflowed: {0}")]
    Magnitude(String),

    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed basis payload: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of internal numerical checks, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Truncation { .. } | Error::Consistency { .. })
    }
}

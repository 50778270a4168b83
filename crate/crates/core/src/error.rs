use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input violates a documented precondition.
    #[error("invalid input: {0}")]
    Validation(String),

    /// An iterative solver hit its cap before converging.
    #[error("{solver} did not converge after {iterations} iterations ({detail})")]
    NonConvergence {
        solver: &'static str,
        iterations: usize,
        /// Partial progress, e.g. how many eigenvalues were deflated.
        detail: String,
    },

    /// The matrix is too close to singular for the requested computation.
    #[error("near-singular input: {0}")]
    NearSingular(String),

    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for solver failures and near-singular refusals.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NonConvergence { .. } | Error::NearSingular(_))
    }
}

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("node index {index} out of bounds for graph with {len} nodes")]
    OutOfBounds { index: usize, len: usize },

    #[error("no features stored for edge ({0}, {1})")]
    MissingEdge(usize, usize),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    /// Input is well formed but the requested computation is undefined on it.
    #[error("{0}")]
    Domain(String),

    #[error("training diverged at iteration {iteration}: loss is {loss}")]
    Diverged { iteration: usize, loss: f64 },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    /// True for failures of the numerical routines themselves, as opposed to
    /// bad input or bad flags.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::Domain(_) | Error::Diverged { .. })
    }
}

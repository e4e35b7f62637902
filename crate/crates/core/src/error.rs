use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain where the operation is defined.
    #[error("domain error in {op}: {msg}")]
    Domain { op: &'static str, msg: String },

    /// Two fields or a field and a potential were sampled on different grids.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("solver failed: {0}")]
    Solver(String),

    #[error("invalid configuration:\n{}", .0.join("\n"))]
    Config(Vec<String>),

    #[error("malformed file {path}: {msg}")]
    Format { path: PathBuf, msg: String },

    #[error("{phase}: {source}")]
    Phase {
        phase: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Domain { op, msg: msg.into() }
    }

    /// Labels an error with the run phase it came from.
    pub fn in_phase(self, phase: &'static str) -> Self {
        Error::Phase { phase, source: Box::new(self) }
    }
}

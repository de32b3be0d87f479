use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An operand or argument violates an operation's precondition.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Two structures that must agree in shape do not.
    #[error("structural mismatch: {0}")]
    Structural(String),

    /// A sampled value fell outside every bin of a coverpoint.
    #[error("coverage model incomplete: coverpoint `{coverpoint}` has no bin for value {value}")]
    ModelCompleteness { coverpoint: String, value: u64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("malformed log: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

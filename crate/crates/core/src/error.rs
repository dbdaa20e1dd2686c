use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{origin}: line {line}: {message}")]
    Parse {
        origin: String,
        line: u64,
        message: String,
    },

    #[error("{origin}: line {line}: {message}")]
    InvalidRow {
        origin: String,
        line: u64,
        message: String,
    },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("alignment failed: {0}")]
    Alignment(String),

    #[error("insufficient data for {what}: need at least {needed}, got {got}")]
    InsufficientData {
        what: &'static str,
        needed: usize,
        got: usize,
    },

    #[error("degenerate regression: {0}")]
    DegenerateRegression(String),

    #[error("singular design matrix (column {column} is linearly dependent)")]
    SingularDesign { column: usize },

    #[error("series `{node}` does not cover period {period}: {message}")]
    Coverage {
        node: String,
        period: String,
        message: String,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

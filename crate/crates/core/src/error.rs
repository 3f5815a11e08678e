use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported range: {0}")]
    UnsupportedRange(String),

    /// A quadrature or iteration did not reach its convergence target.
    #[error("accuracy: {0}")]
    Accuracy(String),

    /// The input does not decay inside the integration domain.
    #[error("truncation: {0}")]
    Truncation(String),

    #[error("degenerate circle: {0}")]
    DegenerateCircle(String),

    #[error("bracketing failed: {0}")]
    Bracketing(String),

    #[error("domain too small: {0}")]
    DomainTooSmall(String),

    /// Wraps a point-level failure with the grid indices where it happened.
    #[error("at grid index ({row}, {col}): {source}")]
    AtGridPoint {
        row: usize,
        col: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn at(self, row: usize, col: usize) -> Self {
        Error::AtGridPoint {
            row,
            col,
            source: Box::new(self),
        }
    }

    /// Process exit status for the CLI: 2 for numerical failures, 3 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 3,
            Error::AtGridPoint { source, .. } => source.exit_code(),
            Error::InvalidArgument(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

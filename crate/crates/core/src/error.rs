use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LayoutError {
    #[error("a layout needs at least one circle")]
    Empty,
    #[error("coordinate vector has odd length {0}")]
    OddLength(usize),
    #[error("non-finite coordinate at index {0}")]
    NonFinite(usize),
    #[error("container radius {0} must be finite and at least 1")]
    Radius(f64),
}

/// Failures while reading or writing layout documents and best-known tables.
#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("structure: {0}")]
    Structure(String),
    #[error("validation: {0}")]
    Validation(String),
    #[error(transparent)]
    Layout(#[from] LayoutError),
}

impl IoError {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        IoError::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        IoError::Io {
            path: path.into(),
            source,
        }
    }
}

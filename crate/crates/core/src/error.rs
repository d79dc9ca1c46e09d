use std::path::PathBuf;

use thiserror::Error;

/// Everything that can go wrong in the library.
///
/// The CLI maps [`Error::Validation`] to exit code 2 and every other variant
/// to exit code 1.
#[derive(Debug, Error)]
pub enum Error {
    /// A numeric argument outside the domain of a function (e.g. a utility outside `[0, 1]`).
    #[error("domain error: {0}")]
    Domain(String),

    /// A constructor or calculator precondition was violated.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A preference matrix failed validation.
    #[error("validation failed: {0}")]
    Validation(String),

    /// A state machine was driven out of order (driver bug).
    #[error("contract violation: {0}")]
    Contract(String),

    /// An experiment configuration is inconsistent or unsupported.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

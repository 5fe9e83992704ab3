use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid month {0}; expected 1..=12")]
    InvalidMonth(u32),

    #[error("invalid calendar: {0}")]
    Calendar(String),

    #[error("unknown TOU period `{0}`")]
    UnknownPeriod(String),

    #[error("step index {index} out of range for grid of {len} steps")]
    StepOutOfRange { index: usize, len: usize },

    #[error("tariff field `{field}`: {message}")]
    Tariff { field: String, message: String },

    #[error("series `{name}` has length {got}, expected {expected}")]
    LengthMismatch {
        name: String,
        got: usize,
        expected: usize,
    },

    #[error("profile {path}: {message}")]
    Profile { path: PathBuf, message: String },

    #[error("invalid asset parameter: {0}")]
    Asset(String),

    #[error("recovery window of {window} steps exceeds horizon of {horizon} steps")]
    WindowTooLong { window: usize, horizon: usize },

    #[error("LP backend failure: {0}")]
    Solver(String),

    #[error("month {month}: solver returned {status}")]
    NotOptimal { month: u32, status: String },

    #[error("month {month}: verification failed: {message}")]
    Verification { month: u32, message: String },

    #[error("metric mask selects no steps")]
    EmptyMask,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn tariff(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Tariff {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn length(name: &str, got: usize, expected: usize) -> Self {
        Error::LengthMismatch {
            name: name.to_string(),
            got,
            expected,
        }
    }

    /// Whether this error stems from bad input rather than a solver or I/O fault.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::Solver(_) | Error::NotOptimal { .. } | Error::Verification { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

use thiserror::Error;

/// Errors returned by the density-map, transport and loss routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("grid extents differ: {left_rows}x{left_cols} vs {right_rows}x{right_cols}")]
    GridMismatch {
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },

    #[error("distribution mass {mass} is not 1 (tolerance {tolerance})")]
    MassMismatch { mass: f64, tolerance: f64 },

    #[error("{which} map has zero total mass")]
    ZeroMass { which: &'static str },

    #[error("annotation has no points")]
    EmptyAnnotation,

    #[error("input list is empty")]
    EmptyInput,

    #[error("grid {rows}x{cols} is smaller than the required {min}x{min}")]
    TooSmall { rows: usize, cols: usize, min: usize },

    #[error("requested {requested} points but the grid only has {capacity} pixels")]
    TooMany { requested: usize, capacity: usize },

    #[error("non-finite {what} at iteration {iteration}")]
    NonFinite { what: &'static str, iteration: usize },

    #[error("invalid {what}: {reason}")]
    Invalid { what: &'static str, reason: String },

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("io: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(what: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

//! Crate-wide error type.

use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A state vector violated a type invariant.
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// The winding number is ill-defined because a phase difference sits on
    /// the branch cut at ±π.
    #[error("winding number ill-defined: diff[{index}] = {value} is within {tol} of ±π")]
    IllDefinedWinding { index: usize, value: f64, tol: f64 },

    /// Correlation input with zero variance.
    #[error("degenerate variance: {0}")]
    DegenerateVariance(String),

    /// Least-squares design matrix is singular (e.g. all x identical).
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    /// Too few samples for the requested statistic.
    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    /// Empty input where at least one sample is required.
    #[error("empty input")]
    EmptyInput,

    /// Configuration file or flag combination is invalid.
    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Process exit code for the CLI: 2 for usage/config problems, 1 for
    /// runtime failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Config(_) | Error::InvalidArgument(_) => 2,
            _ => 1,
        }
    }
}

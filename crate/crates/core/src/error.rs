use thiserror::Error;

use crate::material::ValidationReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown model preset `{0}` (expected one of I, II, III, IV, V, VI)")]
    UnknownPreset(String),

    #[error("config line {line}: key `{key}`: {message}")]
    Config {
        line: usize,
        key: String,
        message: String,
    },

    #[error("config: missing required key `{0}`")]
    MissingKey(String),

    #[error("parameter validation failed:\n{0}")]
    Validation(ValidationReport),

    #[error("empty grid")]
    EmptyGrid,

    #[error("a sweep needs at least 2 grid points, got {0}")]
    TooFewPoints(usize),

    #[error("k_max must be positive and finite (got {0:e})")]
    InvalidKMax(f64),

    #[error("grid must be strictly increasing (violated at index {index})")]
    GridNotIncreasing { index: usize },

    #[error("wavenumber grid must be nonnegative (k = {0:e})")]
    NegativeWavenumber(f64),

    #[error("polynomial has no roots to find (degree {0})")]
    DegreeTooLow(usize),

    #[error("companion eigenvalue iteration did not converge (degree {0})")]
    EigenFailure(usize),

    #[error(
        "root count changed along the sweep: expected {expected} branches, found {found} at k = {k:e}"
    )]
    BranchCountMismatch { k: f64, expected: usize, found: usize },

    #[error(
        "insufficient k-range: propagating branches reach {reached:e} rad/s at k_max = {k_max:e}, \
         below the plotted maximum {needed:e} rad/s"
    )]
    InsufficientKRange { k_max: f64, reached: f64, needed: f64 },

    #[error("invalid report: {0}")]
    Report(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Errors caused by the input file or parameter values rather than by
    /// the numerics.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::UnknownPreset(_) | Error::Config { .. } | Error::MissingKey(_) | Error::Validation(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

//! Crate-wide error type.

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure class, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Invalid configuration or arguments.
    Usage,
    /// Input data is malformed, missing or too short.
    Data,
    /// A numerical procedure failed.
    Numeric,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid panel: {0}")]
    InvalidPanel(String),

    #[error("unknown series `{0}`")]
    UnknownSeries(String),

    #[error("series `{series}`, row {row}: {message}")]
    Domain {
        series: String,
        row: usize,
        message: String,
    },

    #[error("series `{series}` has an interior missing value at row {row}")]
    InteriorMissing { series: String, row: usize },

    #[error("insufficient data for {context}: need {needed} rows, have {available}")]
    InsufficientData {
        context: String,
        needed: usize,
        available: usize,
    },

    #[error("kernel window is degenerate (bandwidth {bandwidth}, u = {u}): all weights are zero")]
    DegenerateWindow { bandwidth: f64, u: f64 },

    #[error("every design column has zero variance under the current weights")]
    AllColumnsDegenerate,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("saturated model: df + 2 = {} >= n = {n}", df + 2.0)]
    Saturated { df: f64, n: f64 },

    #[error("hat-matrix trace needs O(n^2) memory and n = {n} exceeds the cap {cap}; use held-out CV stopping")]
    HatCapExceeded { n: usize, cap: usize },

    #[error("no convergence after {sweeps} sweeps (last max coefficient change {max_change:e})")]
    NoConvergence { sweeps: usize, max_change: f64 },

    #[error("ratio undefined: {0}")]
    UndefinedRatio(String),

    #[error("look-ahead violation: {0}")]
    Lookahead(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Config(_) => ErrorKind::Usage,
            Error::InvalidPanel(_)
            | Error::UnknownSeries(_)
            | Error::Domain { .. }
            | Error::InteriorMissing { .. }
            | Error::InsufficientData { .. }
            | Error::DimensionMismatch { .. }
            | Error::Parse(_)
            | Error::Io(_)
            | Error::Csv(_) => ErrorKind::Data,
            Error::DegenerateWindow { .. }
            | Error::AllColumnsDegenerate
            | Error::Saturated { .. }
            | Error::HatCapExceeded { .. }
            | Error::NoConvergence { .. }
            | Error::UndefinedRatio(_)
            | Error::Lookahead(_) => ErrorKind::Numeric,
        }
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn insufficient(
        context: impl Into<String>,
        needed: usize,
        available: usize,
    ) -> Self {
        Error::InsufficientData {
            context: context.into(),
            needed,
            available,
        }
    }
}

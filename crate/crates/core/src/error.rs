use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("truncation K = {k} exceeds the largest resolved mode {max} of the grid")]
    TruncationTooLarge { k: usize, max: usize },

    #[error("solver blew up at step {step} (|coefficient| = {magnitude:e})")]
    BlowUp { step: usize, magnitude: f64 },

    #[error("time {t} outside [0, {t_end}]")]
    TimeOutOfRange { t: f64, t_end: f64 },

    #[error("reaction argument {value} outside the declared domain [{lo}, {hi}]")]
    RangeExcursion { value: f64, lo: f64, hi: f64 },

    #[error("non-finite drift at iteration {iteration}")]
    NonFiniteDrift { iteration: usize, theta: Vec<f64> },

    #[error("empty sample set")]
    EmptySamples,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

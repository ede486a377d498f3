use thiserror::Error;

/// Errors raised while building signals, encoding, or reconstructing.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum FriError {
    #[error("invalid signal: {0}")]
    InvalidSignal(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("pulse spectrum vanishes at harmonic l = {harmonic}; the samples carry no information there")]
    KernelNullsSignal { harmonic: i64 },

    #[error("kernel fails alias cancellation for K = {model_order}: worst harmonic l = {worst_harmonic}, deviation {deviation:.3e}")]
    Aliasing {
        model_order: usize,
        worst_harmonic: i64,
        deviation: f64,
    },

    #[error("signal is degenerate: dynamic range {range:.3e} is below 1e-12")]
    DegenerateSignal { range: f64 },

    #[error("need at least 2 time points to compute sampling density, got {found}")]
    TooFewEvents { found: usize },

    #[error("event times are not strictly increasing at index {index}")]
    DuplicateTimes { index: usize },

    #[error(
        "channel {channel}: {found} events, need at least {required} (keep C below {bound_hint})"
    )]
    InsufficientEvents {
        channel: usize,
        found: usize,
        required: usize,
        bound_hint: String,
    },

    #[error("{found} events across all channels, need at least {required}")]
    InsufficientTotalEvents { found: usize, required: usize },

    #[error("thresholds of channels {first} and {second} coincide ({value})")]
    DuplicateThresholds {
        first: usize,
        second: usize,
        value: f64,
    },

    #[error("annihilation nullspace is not one-dimensional for K = {model_order}: gap sigma_K/sigma_K+1 = {gap:.3e}")]
    ModelOrderMismatch { model_order: usize, gap: f64 },

    #[error("channels do not share a common support: worst block residual {residual:.3e} on channel {channel}")]
    NoCommonSupport { channel: usize, residual: f64 },

    #[error("spline with degree {degree} is not periodic: amplitudes must sum to zero (sum = {sum:.3e})")]
    NonPeriodicSpline { degree: usize, sum: f64 },

    #[error("eigenvalue computation failed for the companion matrix")]
    RootFinding,

    #[error("io error: {0}")]
    Io(String),

    #[error("format error: {0}")]
    Format(String),
}

impl From<std::io::Error> for FriError {
    fn from(e: std::io::Error) -> Self {
        FriError::Io(e.to_string())
    }
}

impl From<csv::Error> for FriError {
    fn from(e: csv::Error) -> Self {
        FriError::Format(e.to_string())
    }
}

impl From<serde_json::Error> for FriError {
    fn from(e: serde_json::Error) -> Self {
        FriError::Format(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, FriError>;

use thiserror::Error;

/// Errors raised by the laboratory's numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite input component at index {index}: {value}")]
    NonFinite { index: usize, value: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("transform matrix is singular")]
    SingularTransform,

    #[error("transform matrix is ill-conditioned (condition number {condition:e} > {limit:e})")]
    IllConditioned { condition: f64, limit: f64 },

    #[error("too few samples: need at least {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("unsupported measure: {0}")]
    Unsupported(String),

    #[error("zero direction vector")]
    ZeroDirection,

    #[error("source measure charges the origin: {zeros} of {count} samples are zero")]
    ChargesOrigin { zeros: usize, count: usize },

    #[error("quantile inversion failed: {0}")]
    Quantile(String),

    #[error("containment ‖·‖_K ≤ ‖·‖_L does not hold (lower ratio {scale})")]
    ContainmentViolated { scale: f64 },

    #[error("no feasible transform in the candidate family")]
    NoFeasibleTransform,

    #[error("Lipschitz pre-check failed: observed ratio {observed} exceeds claimed constant {claimed}")]
    LipschitzPrecheck { observed: f64, claimed: f64 },

    #[error("embedding pre-check failed: {0}")]
    EmbeddingPrecheck(String),

    #[error("unknown profile `{0}` without overrides")]
    UnknownProfile(String),

    #[error("empty {0}")]
    Empty(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

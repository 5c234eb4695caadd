use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A vector did not match the dimensionality of its context.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Normalization requested before any sample was recorded.
    #[error("no statistics")]
    NoStatistics,

    /// Meshing requested on an empty state set.
    #[error("empty state set")]
    EmptyStateSet,

    /// A mesh curve with fewer than two entries cannot be fit.
    #[error("degenerate curve")]
    DegenerateCurve,

    /// Mesh curve scale factor must be strictly greater than one.
    #[error("scale factor must be > 1, got {0}")]
    InvalidScaleFactor(f64),

    /// Initial box size must be strictly positive.
    #[error("initial box size must be > 0, got {0}")]
    InvalidBoxSize(f64),

    /// Series too short for the requested lag structure.
    #[error("series too short: {len} values, need at least {min}")]
    SeriesTooShort { len: usize, min: usize },

    /// Variation order must be strictly positive.
    #[error("variation order must be > 0, got {0}")]
    InvalidOrder(f64),

    /// Integration produced a non-finite state.
    #[error("dynamics blowup at step {step}")]
    DynamicsBlowup { step: usize },

    /// A policy update produced non-finite weights.
    #[error("training diverged at epoch {epoch}")]
    Diverged { epoch: usize },

    /// Configuration failed validation.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// Unknown environment name.
    #[error("unknown environment: {0}")]
    UnknownEnvironment(String),
}

pub type Result<T> = std::result::Result<T, Error>;

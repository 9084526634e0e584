use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReachError {
    #[error("invalid interval: lower bound {lo} exceeds upper bound {hi}")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("group mismatch: {0}")]
    GroupMismatch(String),

    #[error("rotation angle is within {tol:e} of pi; logarithm is not unique")]
    AngleAtCut { tol: f64 },

    #[error("relative angle {angle} left the principal branch (-pi, pi)")]
    BranchViolation { angle: f64 },

    #[error("tangent box left the injectivity region at step {step}")]
    InjectivityExceeded { step: usize },

    #[error("monotonicity hypothesis failed at step {step}")]
    NonMonotoneStep { step: usize },

    #[error("ordering violation: lower bound exceeds upper bound in coordinate {index}")]
    OrderingViolation { index: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("io: {0}")]
    Io(String),

    #[error("parse: {0}")]
    Parse(String),
}

impl From<std::io::Error> for ReachError {
    fn from(e: std::io::Error) -> Self {
        ReachError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, ReachError>;

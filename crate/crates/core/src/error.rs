use thiserror::Error;

/// Errors produced by the clustering library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ShiftError {
    /// Two vectors (or a vector and a point set) disagree on dimension.
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// The input data violates a structural requirement.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A configuration value is out of range.
    #[error("configuration error: {0}")]
    Config(String),

    /// Two label vectors of different length were compared.
    #[error("label length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("no modes survive pruning")]
    NoModesSurvive,

    #[error("no seeds converged")]
    NoSeedsConverged,

    #[error("cannot place separated centers")]
    CenterPlacement,

    #[error("unsupported dataset kind for this generator: {0}")]
    UnsupportedKind(String),
}

impl ShiftError {
    /// Errors that stem from bad input or configuration rather than from the
    /// algorithm failing on valid input.
    pub fn is_usage(&self) -> bool {
        !matches!(self, ShiftError::NoModesSurvive | ShiftError::NoSeedsConverged)
    }
}

pub type Result<T, E = ShiftError> = std::result::Result<T, E>;

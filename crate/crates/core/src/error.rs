use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid Gaussian state: {0}")]
    InvalidState(String),

    #[error("Hilbert-space dimension {dim} exceeds the configured cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("mismatched mode count: {left} vs {right}")]
    ModeCountMismatch { left: usize, right: usize },

    #[error("operator does not conserve the block charge (element {row},{col})")]
    BrokenSymmetry { row: usize, col: usize },
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

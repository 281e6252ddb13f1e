use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A size parameter is outside the supported range (zero or one spin, empty state, ...).
    #[error("invalid size: {0}")]
    InvalidSize(String),

    /// Two objects that must agree in size do not.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A site, bond, or cut index is out of range.
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    /// A requested random graph cannot be built from the given parameters.
    #[error("graph construction failed: {0}")]
    Construction(String),

    /// The problem size exceeds what an exact method can handle.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// A parameter value violates its documented range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Empty input where at least one element is required.
    #[error("invalid input: {0}")]
    EmptyInput(String),

    /// Non-finite numbers or a failed factorization inside a numerical routine.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

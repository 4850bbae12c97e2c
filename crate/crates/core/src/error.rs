//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors raised by constructors and operations of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A lift parameter whose modulus is neither 0 nor 1.
    #[error("parameter {re}+{im}i is not in T ∪ {{0}} (modulus {modulus})")]
    NotOnCircle { re: f64, im: f64, modulus: f64 },

    /// Two objects that must live on the same space do not.
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// A vector that must be orthogonal to the vacuum is not.
    #[error("vector has a nonzero vacuum component {0}")]
    NotInComplement(f64),

    /// A matrix failed a structural requirement (isometry, square, ...).
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    /// Applying a lift would produce a word longer than the truncation bound.
    #[error("truncation overflow: a word would exceed the maximal length {max_len}")]
    Truncation { max_len: usize },

    /// A lift or product specification outside the admissible set.
    #[error("inadmissible specification: {0}")]
    Inadmissible(String),

    /// A dense materialization would be too large.
    #[error("size overflow: {0}")]
    SizeOverflow(String),

    /// Malformed input (moment words, letters, labels, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

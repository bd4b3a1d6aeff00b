//! Error type shared by every module of the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A vector or matrix has the wrong dimension for the lattice it is used with.
    #[error("dimension mismatch: expected {expected}, got {got} in {context}")]
    DimensionMismatch {
        expected: usize,
        got: usize,
        context: &'static str,
    },

    /// A structural invariant of an input value does not hold.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// A documented precondition of an operation was violated by the caller.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A bounded search ran past its a-priori bound. This signals inconsistent
    /// input data (e.g. a matrix that is not actually an isometry), never a
    /// shortcoming of the bound itself.
    #[error("search bound exceeded in {op}: scanned {loops} candidates (bound {bound})")]
    SearchBound {
        op: &'static str,
        loops: u64,
        bound: String,
    },

    /// An internal cross-check failed; indicates an arithmetic bug and is
    /// reported rather than silently ignored.
    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),

    #[error("serialization: {0}")]
    Serde(String),
}

pub type Result<T> = std::result::Result<T, Error>;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Errors surfaced by geometry, quadrature, and inequality evaluation.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter is outside its documented range.
    InvalidParameter(String),
    /// A point/cube dimension does not match the ambient dimension.
    DimensionMismatch { expected: usize, got: usize },
    /// An integrand returned a non-finite value; carries the offending node.
    Evaluation { node: Vec<f64> },
    /// Refinement did not converge; the integral is treated as divergent.
    Divergence(String),
    /// The kernel blows up faster than the integrand vanishes.
    Singularity(String),
    /// A documented precondition does not hold for the given inputs.
    Precondition(String),
    /// The requested computation is not available for this input family.
    Capability(String),
    /// Internal invariant violation (malformed tree, fit degeneracy, ...).
    Internal(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::Evaluation { node } => {
                write!(f, "non-finite integrand value at node {node:?}")
            }
            Error::Divergence(msg) => write!(f, "divergent integral: {msg}"),
            Error::Singularity(msg) => write!(f, "singular integrand: {msg}"),
            Error::Precondition(msg) => write!(f, "precondition violated: {msg}"),
            Error::Capability(msg) => write!(f, "unsupported input family: {msg}"),
            Error::Internal(msg) => write!(f, "internal error: {msg}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}

use thiserror::Error;

/// Errors raised by the numerical kernels, steppers and oracles.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A pivot fell below the scale-relative singularity threshold.
    #[error("matrix is numerically singular (pivot {pivot:.3e} at column {column})")]
    SingularMatrix { column: usize, pivot: f64 },

    #[error("shape mismatch in {op}: expected {expected}, found {found}")]
    ShapeMismatch {
        op: &'static str,
        expected: String,
        found: String,
    },

    /// Every power-iteration restart failed to settle.
    #[error("power iteration did not converge after {restarts} restarts")]
    NoConvergence { restarts: usize },

    #[error("non-finite value encountered in {context}")]
    NonFiniteValue { context: String },

    /// No coordinate moved by more than the guard between two iterates.
    #[error("backward difference is degenerate in every column")]
    AllColumnsDegenerate,

    #[error("iteration {k} exceeds the finite horizon N = {horizon}")]
    HorizonExceeded { k: usize, horizon: usize },

    #[error("problem too large for brute force: {size} unknowns (cap {cap})")]
    TooLarge { size: usize, cap: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("missing oracle capability: {0}")]
    MissingCapability(&'static str),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn shape(op: &'static str, expected: impl ToString, found: impl ToString) -> Self {
        Error::ShapeMismatch {
            op,
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    pub(crate) fn non_finite(context: impl Into<String>) -> Self {
        Error::NonFiniteValue {
            context: context.into(),
        }
    }

    pub(crate) fn invalid(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }
}

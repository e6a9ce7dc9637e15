use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// An argument fell outside the domain inequality of the function it was
/// passed to.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{function}: {value} violates {constraint}")]
pub struct DomainViolation {
    pub function: &'static str,
    pub value: f64,
    pub constraint: String,
}

impl DomainViolation {
    pub fn new(function: &'static str, value: f64, constraint: impl Into<String>) -> Self {
        Self {
            function,
            value,
            constraint: constraint.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Domain(#[from] DomainViolation),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// The normalization equation has no sign change on the feasible interval.
    #[error("normalization has no bracket: {0}")]
    NoBracket(String),

    #[error("normalization solver did not converge after {iterations} iterations (residual {residual:e})")]
    SolverDiverged { iterations: usize, residual: f64 },

    #[error("residual sequence did not settle: error estimate {estimate:e} exceeds {tolerance:e}")]
    NotConverged { estimate: f64, tolerance: f64 },

    #[error("tail probability below x = {x} is exactly zero")]
    ZeroTail { x: f64 },

    #[error("enumeration of {count} compositions exceeds the limit of {limit}")]
    TooManyCompositions { count: u128, limit: u128 },

    #[error("malformed pmf record at line {line}: {reason}")]
    Record { line: usize, reason: String },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Errors from the root finder and the tail computation, as opposed to
    /// rejected inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoBracket(_)
                | Error::SolverDiverged { .. }
                | Error::NotConverged { .. }
                | Error::ZeroTail { .. }
        )
    }
}

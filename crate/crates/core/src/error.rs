use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A constructor invariant was violated.
    #[error("invalid {what}: {reason}")]
    Invalid { what: &'static str, reason: String },

    /// The observation cannot be reconciled with the prior or the channel.
    #[error("inconsistent measurement: {0}")]
    Inconsistent(String),

    /// Adaptive quadrature ran out of subdivisions. Carries the partial result.
    #[error(
        "quadrature did not converge after {subdivisions} subdivisions \
         (partial value {value:e}, error estimate {abs_error:e})"
    )]
    Convergence {
        value: f64,
        abs_error: f64,
        subdivisions: usize,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(what: &'static str, reason: impl Into<String>) -> Error {
    Error::Invalid {
        what,
        reason: reason.into(),
    }
}

pub(crate) fn domain(reason: impl Into<String>) -> Error {
    Error::Domain(reason.into())
}

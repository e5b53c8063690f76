use thiserror::Error;

/// Failure modes of the closed-form evaluators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EscapeError {
    /// An argument lies outside the domain where the formula is defined.
    #[error("`{field}` = {value} is out of domain: {reason}")]
    Domain {
        field: &'static str,
        value: f64,
        reason: &'static str,
    },
    /// A series, quadrature or special-function evaluation failed to reach its tolerance.
    #[error("{what} did not converge after {iterations} iterations (last error estimate {estimate:e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        estimate: f64,
    },
}

impl EscapeError {
    pub(crate) fn domain(field: &'static str, value: f64, reason: &'static str) -> Self {
        EscapeError::Domain {
            field,
            value,
            reason,
        }
    }

    pub fn is_domain(&self) -> bool {
        matches!(self, EscapeError::Domain { .. })
    }
}

pub type Result<T> = std::result::Result<T, EscapeError>;

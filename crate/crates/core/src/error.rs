use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Library error type. [`Error::is_validation`] separates caller mistakes
/// (bad parameters) from numerical failures (a solver or quadrature that
/// could not reach its accuracy target).
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid {name}: {reason}")]
    InvalidInput { name: &'static str, reason: String },

    /// The step-size policy could not bring the energy drift under the
    /// configured bound; carries the best drift achieved.
    #[error("energy drift {achieved:e} exceeds bound {bound:e} after {steps} steps")]
    DriftBoundExceeded {
        achieved: f64,
        bound: f64,
        steps: usize,
    },

    /// Doubling the quadrature order moved the result by more than the
    /// convergence tolerance.
    #[error("quadrature not converged at order {order}: doubling changed result by {delta:e} (tol {tol:e})")]
    QuadratureNotConverged { order: usize, delta: f64, tol: f64 },

    /// An image series was asked to cover more spreading than its
    /// truncation allows.
    #[error("image-series truncation {given} too small: requested time needs at least {required}")]
    TruncationTooSmall { required: usize, given: usize },
}

impl Error {
    pub fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidInput {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors caused by invalid input rather than numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput { .. } | Error::TruncationTooSmall { .. }
        )
    }
}

pub(crate) fn ensure_finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::invalid(name, format!("must be finite, got {value}")))
    }
}

pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<f64> {
    ensure_finite(name, value)?;
    if value > 0.0 {
        Ok(value)
    } else {
        Err(Error::invalid(name, format!("must be > 0, got {value}")))
    }
}

use thiserror::Error;

use crate::linalg::LinalgError;

/// Errors raised by the physics layer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("singular parameters: {0}")]
    Singular(String),
    #[error("evolution is not cyclic (|<psi0|psiT>| = {overlap:.3e} < 0.5)")]
    NonCyclic { overlap: f64 },
    #[error("propagation did not converge: step-halving change {change:.3e} exceeds tolerance {tolerance:.3e}")]
    Convergence { change: f64, tolerance: f64 },
    #[error("series diverges: ratio {ratio:.4} >= 1")]
    DivergentSeries { ratio: f64 },
    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by sampling, decomposition, solvers and inversion.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid parameter (bad ensemble spec, malformed grid, ...).
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Evaluation outside a function's mathematical domain
    /// (e.g. `Im λ > 0` for a characteristic exponent).
    #[error("domain error: {0}")]
    Domain(String),

    /// Operation not defined for the requested model kind.
    #[error("unsupported for this model: {0}")]
    Unsupported(String),

    /// Numerical failure (eigensolver breakdown, divergent quadrature,
    /// violated exact identity).
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Fixed-point iteration did not reach tolerance.
    #[error("solver did not converge: residual {residual:.3e} after {iterations} iterations ({context})")]
    NonConvergence {
        residual: f64,
        iterations: usize,
        context: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

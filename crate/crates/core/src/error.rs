//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by estimation, testing and simulation routines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A parameter violated its domain constraint.
    #[error("invalid parameter {name} = {value}: {constraint}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    /// A sample violated the invariants required for inference.
    #[error("degenerate sample `{label}`: {reason}")]
    DegenerateSample { label: String, reason: String },

    /// An intermediate quantity overflowed or became undefined.
    #[error("non-finite value in {context}")]
    NonFinite { context: String },

    /// Adaptive quadrature could not reach the requested tolerance.
    #[error("quadrature did not converge: achieved {achieved:e}, requested {requested:e}")]
    QuadratureNonConvergence { achieved: f64, requested: f64 },

    /// The Newton iteration stopped before reaching the gradient tolerance.
    #[error(
        "estimator did not converge after {iterations} iterations \
         (gradient norm {gradient_norm:e})"
    )]
    DidNotConverge {
        iterations: usize,
        gradient_norm: f64,
    },

    /// A bundled dataset was requested under an unknown name.
    #[error("unknown dataset `{name}`; available: {available}")]
    UnknownDataset { name: String, available: String },

    /// A simulation configuration failed validation.
    #[error("invalid simulation config field `{field}`: {reason}")]
    InvalidConfig { field: &'static str, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value violates its documented constraints.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A site index does not address a lattice site.
    #[error("site index {index} out of range for {n} sites")]
    SiteOutOfRange { index: usize, n: usize },

    /// Vector/matrix dimensions do not agree.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The dense eigensolver did not converge or produced unusable output.
    #[error("eigensolver failure: {0}")]
    Eigensolver(String),

    /// A fidelity series never settles below the requested threshold.
    #[error("not equilibrated within horizon (threshold {threshold})")]
    NotEquilibrated { threshold: f64 },

    /// A survival trace never reaches the relaxation level.
    #[error("not relaxed within horizon (level {level})")]
    NotRelaxed { level: f64 },

    /// The reset protocol cannot reach the target detection probability.
    #[error("reset protocol never converges: {0}")]
    NoConvergence(&'static str),

    /// A trace is too short for the requested operation.
    #[error("trace too short: need {needed} steps, have {available}")]
    TraceTooShort { needed: usize, available: usize },

    /// A tail-fit window contains no usable signal.
    #[error("unusable fit window: {0}")]
    BadFitWindow(String),
}

pub type Result<T> = std::result::Result<T, Error>;

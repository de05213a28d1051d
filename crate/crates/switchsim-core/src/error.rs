use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Error taxonomy for the simulation library.
///
/// Contract violations indicate a caller handed in data that breaks a
/// documented precondition (wrong dimension, non-Hermitian input, a Kraus
/// set that is not trace-preserving). The numerical variants carry enough
/// context to reproduce the failure.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate measurement branch: outcome probability {probability:e} is below 1e-14, the normalized state is undefined")]
    DegenerateBranch { probability: f64 },

    #[error("singular closed-form expression: denominator magnitude {denominator:e} is below 1e-14")]
    SingularExpression { denominator: f64 },

    #[error("convergence failure in {context}: residual {residual:e} exceeds tolerance {tolerance:e}")]
    Convergence {
        context: &'static str,
        residual: f64,
        tolerance: f64,
    },

    #[error("no sign change in bracket [{lo}, {hi}]")]
    RootBracket { lo: f64, hi: f64 },

    #[error("matrix inversion rejected: condition number {condition:e} exceeds 1e10")]
    IllConditioned { condition: f64 },

    #[error("linearity violation: {0}")]
    Linearity(String),
}

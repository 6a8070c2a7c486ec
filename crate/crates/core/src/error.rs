//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("undeclared symbol `{name}` at position {position}")]
    UndeclaredSymbol { name: String, position: usize },

    #[error("unbound symbol `{name}`")]
    UnboundSymbol { name: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("coordinate mismatch: {0}")]
    CoordMismatch(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("sampling failed: only {hits} of {attempts} sample points were nonsingular")]
    Sampling { hits: usize, attempts: usize },

    #[error("chart guard violated at {point:?}")]
    ChartViolation { point: Vec<f64> },

    #[error("rank deficient: {0}")]
    RankDeficient(String),

    #[error("no reduction: {0}")]
    NoReduction(String),

    #[error("trivial quotient: {0}")]
    TrivialQuotient(String),

    #[error("Newton iteration diverged: residual {residual:.3e} after {iterations} iterations")]
    NewtonDiverged { residual: f64, iterations: usize },

    #[error("integration exceeded {max_steps} steps at t = {t}")]
    StepLimit { t: f64, max_steps: usize },

    #[error("state became non-finite at t = {t}")]
    Blowup { t: f64 },

    #[error("numerical check failed: {0}")]
    Numerical(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

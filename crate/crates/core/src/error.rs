use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("resource envelope exceeded: {0}")]
    Resource(String),

    #[error("phase solver did not converge after {iterations} iterations (best residual {best_residual:e})")]
    SolverFailure { iterations: usize, best_residual: f64 },

    #[error("non-injective encoding: {0}")]
    NonInjective(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors produced by the kinematics engine.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A parameter set violates its invariants.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// The bracketed root finder could not find a sign change.
    #[error("no root in bracket [{lo}, {hi}]: f(lo) = {f_lo:e}, f(hi) = {f_hi:e}")]
    NoRootInBracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    /// An iterative solver ran out of iterations.
    #[error("solver did not converge after {iterations} iterations (max residual {max_residual:e})")]
    NotConverged {
        iterations: usize,
        max_residual: f64,
        residuals: Vec<f64>,
    },

    /// Index out of range for the manipulator.
    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    /// Geometry too degenerate for the requested operation.
    #[error("degenerate geometry: {0}")]
    Degenerate(String),

    /// Data mismatch between model output and trace.
    #[error("mismatch: {0}")]
    Mismatch(String),

    #[error("unknown strategy '{name}', available: {available}")]
    UnknownStrategy { name: String, available: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

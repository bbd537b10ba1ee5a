use thiserror::Error;

use crate::sparsela::SolveReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed or inconsistent input (dimension mismatch, duplicates, ...).
    #[error("input error: {0}")]
    Input(String),

    #[error("matrix is not symmetric positive definite (pivot {pivot} at row {row})")]
    NotSpd { row: usize, pivot: f64 },

    #[error("solver breakdown after {iterations} iterations: {reason}")]
    Breakdown { iterations: usize, reason: String },

    #[error("solver did not converge: {} iterations, relative residual {:.3e}", .report.iterations, .report.relative_residual)]
    NotConverged { report: SolveReport },

    /// Every active component carries zero variance, so relative variances
    /// are undefined.
    #[error("degenerate field: {0}")]
    Degenerate(String),

    /// A failure inside adaptive round `round`.
    #[error("round {round}: {source}")]
    InRound {
        round: usize,
        #[source]
        source: Box<Error>,
    },

    /// A failure while solving Monte Carlo sample `index`.
    #[error("sample {index} (xi = {xi:?}): {source}")]
    InSample {
        index: u64,
        xi: Vec<f64>,
        #[source]
        source: Box<Error>,
    },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("internal error: {0}")]
    Internal(String),
}

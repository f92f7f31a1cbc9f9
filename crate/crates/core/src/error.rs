use std::path::PathBuf;

use crate::linalg::LinearSolveReport;

/// Errors raised by the solver library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got} ({context})")]
    DimensionMismatch {
        expected: usize,
        got: usize,
        context: &'static str,
    },

    #[error("factorization failed: non-positive pivot {pivot:e} at row {row}")]
    Factorization { row: usize, pivot: f64 },

    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),

    #[error("degenerate projection stencil: {0}")]
    DegenerateStencil(String),

    #[error("incompatible interface discretization: {0}")]
    Incompatible(String),

    #[error("point ({x}, {y}) lies outside the domain")]
    OutOfDomain { x: f64, y: f64 },

    #[error("invalid data: {0}")]
    Data(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("time step failed after {iterations} Picard iterations: {reason}")]
    StepFailure {
        iterations: usize,
        reason: String,
        pressure_solve: Option<LinearSolveReport>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_len(expected: usize, got: usize, context: &'static str) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected,
            got,
            context,
        })
    }
}

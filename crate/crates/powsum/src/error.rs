//! Crate-wide error type.

use std::fmt;

use thiserror::Error;

/// Which non-degeneracy condition a learner run tripped over, with the
/// dimension that was measured and the one the closed-form binomials predict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegeneracyReport {
    /// Condition number, 1 to 4.
    pub condition: u8,
    pub measured: usize,
    pub expected: usize,
    pub detail: String,
}

impl fmt::Display for DegeneracyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "non-degeneracy condition {} failed: measured {}, expected {} ({})",
            self.condition, self.measured, self.expected, self.detail
        )
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("duplicate abscissa in interpolation data")]
    DuplicateAbscissa,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("inconsistent linear system")]
    InconsistentSystem,
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("power series root needs constant term 1")]
    SeriesConstantTerm,
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("infeasible parameters: {0}")]
    Infeasible(String),
    #[error("target is not in the span of the basis")]
    NotInSpan,
    #[error("{0}")]
    Degenerate(DegeneracyReport),
    #[error("retry budget exhausted: {0}")]
    RetryExhausted(String),
}

impl Error {
    pub fn degenerate(condition: u8, measured: usize, expected: usize, detail: impl Into<String>) -> Self {
        Error::Degenerate(DegeneracyReport { condition, measured, expected, detail: detail.into() })
    }
}

pub type Result<T> = std::result::Result<T, Error>;

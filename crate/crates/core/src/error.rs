//! Error taxonomy shared by every solver module.
//!
//! Variants are grouped by who has to fix the problem: `Schema`, `Parameter`
//! and `Argument` point at the caller's inputs, `Infeasible` and
//! `SingularHessian` are honest mathematical outcomes, `Complexity` protects
//! documented enumeration caps, and `Ingestion`/`Consistency` blame the data.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
#[non_exhaustive]
pub enum Error {
    /// A name (attribute, item id, group label) does not resolve against the data.
    #[error("schema error: {0}")]
    Schema(String),

    /// A parameter point has the wrong dimension or lies outside its domain.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// A plain argument is out of range (k, sample count, step size, ...).
    #[error("invalid argument: {0}")]
    Argument(String),

    /// No selection satisfies the hard fairness predicate.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// The solution Hessian is exactly singular or numerically unusable.
    #[error("singular Hessian{}", fmt_condition(.condition))]
    SingularHessian {
        /// 1-norm condition estimate, when one could be formed at all.
        condition: Option<f64>,
    },

    /// An enumeration would exceed its documented cap.
    #[error("complexity cap exceeded: {actual} {what} > limit {limit}")]
    Complexity {
        what: &'static str,
        actual: usize,
        limit: usize,
    },

    /// Raw tabular input could not be ingested.
    #[error("ingestion error{}: {message}", fmt_location(.row, .column))]
    Ingestion {
        /// 1-based data row (header excluded), when known.
        row: Option<usize>,
        column: Option<String>,
        message: String,
    },

    /// Supplied values contradict the dataset they claim to complete.
    #[error("consistency error: {0}")]
    Consistency(String),
}

fn fmt_condition(condition: &Option<f64>) -> String {
    match condition {
        Some(c) => format!(" (condition estimate {c:.3e})"),
        None => String::new(),
    }
}

fn fmt_location(row: &Option<usize>, column: &Option<String>) -> String {
    match (row, column) {
        (Some(r), Some(c)) => format!(" at row {r}, column '{c}'"),
        (Some(r), None) => format!(" at row {r}"),
        (None, Some(c)) => format!(" in column '{c}'"),
        (None, None) => String::new(),
    }
}

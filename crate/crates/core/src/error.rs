use thiserror::Error;

use crate::metric::MetricReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input shape (non-square matrix, mismatched dimensions).
    #[error("structural error: {0}")]
    Structure(String),

    /// An argument outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid metric: {0}")]
    InvalidMetric(MetricReport),

    /// A construction would exceed a configured size cap.
    #[error("size cap exceeded: {what} ({count} > {cap})")]
    SizeCap { what: String, count: u128, cap: u128 },

    #[error("graph is disconnected: no path between vertex {0} and vertex {1}")]
    Disconnected(String, String),

    #[error("kernel is not of negative type: Gram eigenvalue {eigenvalue:e} below -{threshold:e}")]
    NotNegativeType { eigenvalue: f64, threshold: f64 },

    #[error("not a cubical skeleton: hyperplane class {class} {reason}")]
    NotCubical { class: usize, reason: String },

    #[error("graph is not bipartite: odd cycle through edge ({0}, {1})")]
    NotBipartite(usize, usize),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Two independent routes to the same quantity disagreed.
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
}

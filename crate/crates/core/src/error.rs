use std::path::PathBuf;

/// Crate-wide error type.
///
/// The CLI maps these onto stable exit codes, so variants are grouped by
/// failure class rather than by module.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Caller misuse: empty inputs, invalid parameters, exceeded budgets.
    #[error("{0}")]
    Usage(String),

    /// Point dimensions do not agree.
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    /// A point lies outside the generator's domain.
    #[error("{0}")]
    Domain(String),

    /// Malformed input file.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Input data failed the requested validation mode.
    #[error("validation failed: {0}")]
    Validation(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Bisection exhausted its iteration budget.
    #[error("bisection did not converge{context}: final gap {gap:.3e}")]
    Convergence { gap: f64, context: String },
}

pub type Result<T> = std::result::Result<T, Error>;

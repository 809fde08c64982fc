use thiserror::Error;

/// Errors surfaced by the library.
///
/// The variants are grouped so the CLI can map them onto exit codes:
/// input/data problems, numeric failures and unsupported requests.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("truncated SVD did not converge after {iterations} iterations (residual {residual:.3e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("invalid parameters: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error("domain error: entry ({row}, {col}) = {value} outside required interval {interval}")]
    Domain {
        row: usize,
        col: usize,
        value: f64,
        interval: &'static str,
    },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// True for failures of the numerical routines themselves, as opposed to bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::Convergence { .. })
    }
}

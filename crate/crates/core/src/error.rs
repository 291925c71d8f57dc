use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument or input falls outside an operation's contract.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configured size cap would be exceeded.
    #[error("resource error: {0}")]
    Resource(String),

    #[error("convergence error: no convergence after {iterations} iterations (residual {residual:.3e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("grid too small: boundary amplitude {boundary:.3e} exceeds {limit:.1e}")]
    GridTooSmall { boundary: f64, limit: f64 },

    #[error("accuracy error: {0}")]
    Accuracy(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short, stable name of the error class, used on the CLI diagnostic stream.
    pub fn class(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Resource(_) => "resource",
            Error::Convergence { .. } => "convergence",
            Error::GridTooSmall { .. } => "grid-too-small",
            Error::Accuracy(_) => "accuracy",
            Error::Internal(_) => "internal",
            Error::Schema(_) | Error::Csv(_) | Error::Json(_) => "schema",
            Error::Io(_) => "io",
        }
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

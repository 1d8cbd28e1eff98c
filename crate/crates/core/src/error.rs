use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A coordinate or argument lies outside the domain an operation is defined on.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Numerical procedure failed (non-convergence, non-finite values, broken factorization).
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// A model or statistics file violates one of its invariants.
    #[error("invariant violated: {0}")]
    Validation(String),

    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// A gradient or test quantity was NaN or infinite. `index` is the offending
    /// component when the value came from a single component.
    #[error("non-finite {what}{}", .index.map(|i| format!(" at component {i}")).unwrap_or_default())]
    NonFinite { what: &'static str, index: Option<usize> },

    #[error("variance test needs a batch of at least 2 components, got {0}")]
    DegenerateBatch(usize),

    #[error("variance test reference vector has zero norm")]
    ZeroReference,

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input text. `line` is 1-based.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A value outside its mathematical domain (negative weight, unknown id, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Incompatible arguments, e.g. merging summaries of different capacity.
    #[error("usage error: {0}")]
    Usage(String),

    /// A brute-force oracle refused to run because its input is too large.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse { line, message: message.into() }
    }
}

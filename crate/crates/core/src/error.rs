use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Inconsistent or unsupported dimensions and settings.
    #[error("configuration error: {0}")]
    Config(String),

    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An operation was called on input that violates its precondition.
    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("search failed: no valid proposal after {attempts} attempts")]
    SearchExhausted { attempts: usize },

    #[error("probability {probability} is outside the observed CCDF range [{min}, {max}]")]
    OutOfRange {
        probability: f64,
        min: f64,
        max: f64,
    },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}

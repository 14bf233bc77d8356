use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("event `{event}` declared with conflicting attributes")]
    AttributeMismatch { event: String },

    #[error("unknown event `{0}`")]
    UnknownEvent(String),

    #[error("unknown state {0}")]
    UnknownState(usize),

    /// A construction would exceed one of the configured size caps.
    #[error("capacity exceeded: {what} would exceed the limit of {limit}; {hint}")]
    Capacity {
        what: &'static str,
        limit: usize,
        hint: &'static str,
    },

    #[error("protected event `{event}` may only be reported as itself, not as `{output}`")]
    ProtectionViolation { event: String, output: String },

    /// A precondition of an operation does not hold; `witness` is a string
    /// demonstrating the violation when one exists.
    #[error("{message}{}", witness.as_ref().map(|w| format!(" (witness: {w})")).unwrap_or_default())]
    Domain {
        message: String,
        witness: Option<String>,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid model: {0}")]
    Validation(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn domain(message: impl Into<String>, witness: Option<String>) -> Self {
        Error::Domain {
            message: message.into(),
            witness,
        }
    }
}

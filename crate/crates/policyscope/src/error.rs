use std::path::PathBuf;

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors surfaced by the optimization loop and its supporting layers.
#[derive(Debug, Error)]
pub enum Error {
    /// A point or argument violates the problem domain (out of bounds, bad dimension).
    #[error("domain error: {0}")]
    Domain(String),

    /// An operation was called in a state where it is undefined (e.g. empty history).
    #[error("state error: {0}")]
    State(String),

    /// Invalid user- or agent-supplied values (weights, criterion names, schedules).
    #[error("validation error: {0}")]
    Validation(String),

    /// Structured output from an agent could not be parsed. The message is
    /// human-readable and is fed back verbatim in the corrective re-ask.
    #[error("parse error: {0}")]
    Parse(String),

    /// Prompt template rendering failed (unknown or unresolved placeholder).
    #[error("template error: {0}")]
    Template(String),

    /// Linear algebra broke down (Cholesky failure after jitter escalation).
    #[error("numerical error: {0}")]
    Numerical(String),

    /// Bad run configuration (unknown optimizer, missing endpoint, invalid budget).
    #[error("config error: {0}")]
    Config(String),

    /// Transport-level failure talking to the chat endpoint, retries exhausted.
    #[error("transport error: {0}")]
    Transport(String),

    /// The endpoint rejected the credentials; never retried.
    #[error("authentication failed (HTTP {status})")]
    Auth { status: u16 },

    /// Non-retryable HTTP error class (4xx other than 401/403/429).
    #[error("HTTP {status}: {message}")]
    Http { status: u16, message: String },

    /// The endpoint answered but the body was not a valid chat completion.
    #[error("protocol error: {0}")]
    Protocol(String),

    /// Replay was attempted against a transcript from an incompatible run.
    #[error("replay error: {0}")]
    Replay(String),

    /// A mock or replay client ran out of canned responses.
    #[error("scripted responses exhausted after {served} calls")]
    ScriptExhausted { served: usize },

    /// Filesystem failure, annotated with the path involved.
    #[error("io error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A file exists but its contents are not in the expected format.
    #[error("file error at {path}: {message}")]
    FileFormat { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn file_format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::FileFormat { path: path.into(), message: message.into() }
    }
}

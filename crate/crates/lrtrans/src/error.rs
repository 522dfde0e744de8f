use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("resource limit exceeded: {what} (limit {limit})")]
    Resource { what: String, limit: usize },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("invalid move: {0}")]
    InvalidMove(String),
    #[error("unknown occurrence id {0}")]
    UnknownOccurrence(usize),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn is_not_applicable(&self) -> bool {
        matches!(self, Error::NotApplicable(_))
    }
}

pub(crate) fn precondition<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Precondition(msg.into()))
}

pub(crate) fn not_applicable<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::NotApplicable(msg.into()))
}

pub(crate) fn violation<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvariantViolation(msg.into()))
}

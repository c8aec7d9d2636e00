use thiserror::Error;

/// Errors raised by the numeric and configuration layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),
    /// A value violates an invariant of a domain type.
    #[error("invariant violation: {0}")]
    Invariant(String),
    /// A caller broke the contract of a decision rule (wrong sample count, exhausted source).
    #[error("contract violation: {0}")]
    Contract(String),
    /// An iterative routine failed to produce a finite answer.
    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Invariant(msg()))
    }
}

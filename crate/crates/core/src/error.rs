use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An input violated a documented precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// No radius in the admissible range lets the fleet cover the area.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// Transition planning did not converge.
    #[error("planning error: {0}")]
    Planning(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

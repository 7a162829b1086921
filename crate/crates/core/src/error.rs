use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid process state: {0}")]
    InvalidState(String),

    /// Exhaustive enumeration was asked for a size it refuses to handle.
    #[error("enumeration cap exceeded: N = {n} but the oracle for {rule} is capped at N = {cap}")]
    EnumerationCap { rule: String, n: usize, cap: usize },

    #[error("infeasible: {0}")]
    Infeasible(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

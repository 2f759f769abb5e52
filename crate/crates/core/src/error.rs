use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HeatError {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A caller broke an operation's precondition.
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("non-finite value at point {index} after step {step}")]
    Diverged { step: usize, index: usize },
    #[error("worker {worker} failed: {message}")]
    Worker { worker: usize, message: String },
}

pub type Result<T> = std::result::Result<T, HeatError>;

pub(crate) fn domain(msg: impl Into<String>) -> HeatError {
    HeatError::Domain(msg.into())
}

pub(crate) fn contract(msg: impl Into<String>) -> HeatError {
    HeatError::Contract(msg.into())
}

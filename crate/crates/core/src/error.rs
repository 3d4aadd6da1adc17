use thiserror::Error;

/// Errors surfaced by the estimators, kernels and oracles.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite observation: {0}")]
    NonFinite(f64),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("no observations have been absorbed")]
    Empty,

    #[error(
        "update rule mismatch: coefficient vector is {expected}, update requested {requested}"
    )]
    ModeMismatch {
        expected: &'static str,
        requested: &'static str,
    },

    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
    },

    #[error("malformed snapshot: {0}")]
    Snapshot(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

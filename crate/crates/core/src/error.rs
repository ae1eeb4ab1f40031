use thiserror::Error;

/// Errors raised by constructions, solvers and estimators.
///
/// The variants are grouped so that the command line front end can map them
/// onto exit codes: invalid input, failed theorem preconditions and failed
/// estimator diagnostics.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("diagnostics failed: {0}")]
    Diagnostics(String),

    #[error("budget exceeded: {what} would need {needed}, cap is {cap}")]
    Budget {
        what: &'static str,
        needed: u128,
        cap: u128,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

use thiserror::Error;

/// Every failure mode surfaced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Domain(String),
    #[error("sites {0:?} are not strictly increasing inside the chamber")]
    Chamber(Vec<i64>),
    #[error("Liggett's condition fails: {0}")]
    Liggett(String),
    #[error("rho = {rho} is outside the validity range (1/(1+sqrt q), 1] for q = {q}")]
    OutOfValidity { rho: f64, q: f64 },
    #[error("numerical failure in {context}: {message}")]
    Numerical { context: String, message: String },
    #[error("residue engine inconsistency: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn numerical(context: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Numerical { context: context.into(), message: message.into() }
    }
}

//! Error taxonomy shared by every module.
//!
//! `Domain` covers mathematically inadmissible parameters (the closed-form
//! thresholds blow up or are undefined), `Argument` covers structural misuse
//! (mismatched grids, bad sizes), `Convergence` carries diagnostics from
//! iterative solvers, and `Config` aggregates every violation found while
//! parsing a run configuration.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("argument error: {0}")]
    Argument(String),

    #[error("convergence failure: {0}")]
    Convergence(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("config error:\n{0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub fn convergence(msg: impl Into<String>) -> Self {
        Error::Convergence(msg.into())
    }
}

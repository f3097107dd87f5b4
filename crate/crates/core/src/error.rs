use thiserror::Error;

/// Errors raised by the estimators, optimizers and the benchmark harness.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or dataset violates a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A privacy parameter is below its calibration floor, or a run would
    /// touch a private sample more often than the accountant allows.
    #[error("privacy calibration violated: {0}")]
    PrivacyCalibration(String),

    /// A closed-form guarantee was requested outside the regime where it holds.
    #[error("out of regime: {0}")]
    OutOfRegime(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}

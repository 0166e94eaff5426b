use thiserror::Error;

/// Errors raised by pricing, calibration and market-data routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameters: {0}")]
    InvalidInput(String),

    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("calibration failed at tenor {tenor}y: {message}")]
    Calibration { tenor: f64, message: String },

    #[error("no admissible barrier: determinant of the scenario CDS matrix has no root in the search bracket")]
    NoAdmissibleBarrier,

    #[error("negative probability {value:e} in null-space vector (barrier {barrier})")]
    NegativeProbability { barrier: f64, value: f64 },

    #[error("root finder: {0}")]
    Root(#[from] crate::math::roots::RootError),

    #[error("cannot access {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

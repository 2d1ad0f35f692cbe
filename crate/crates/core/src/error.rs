//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite coordinate in input")]
    NonFiniteCoordinate,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("unsupported dimension {dim} for {what}")]
    UnsupportedDimension { dim: usize, what: &'static str },

    #[error("query region is not contained in the realization window")]
    OutOfWindow,

    #[error("stabilization diagnostic is not defined for {0}")]
    UnsupportedDiagnostic(&'static str),

    #[error("point pattern does not contain the origin as point 0")]
    MissingOrigin,

    #[error("all Palm weights were zero; estimate undefined")]
    ZeroWeightSum,

    #[error("target value {target} is not bracketed by the sweep")]
    Unbracketed { target: f64 },

    #[error("no calibration constant available for measure `{0}`")]
    MissingCalibration(String),

    #[error("empty segment system")]
    EmptySystem,

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

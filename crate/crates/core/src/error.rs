use thiserror::Error;

/// Errors produced by the waveform design library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("scenario field `{field}`: {reason}")]
    Schema { field: String, reason: String },

    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("time window too short: {0}")]
    Window(String),

    #[error("oracle configuration: {0}")]
    OracleConfig(String),

    #[error("non-positive value {value} for variable `{var}`")]
    NonPositivePoint { var: String, value: f64 },

    #[error("condensation weights invalid: {0}")]
    Weights(String),

    #[error("rate floor {requested} bits exceeds the maximum achievable rate {max} bits")]
    RateInfeasible { requested: f64, max: f64 },

    #[error("malformed design file: {0}")]
    Design(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

//! Crate-wide error type.

use thiserror::Error;

#[derive(Error, Debug)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid value: {0}")]
    Domain(String),

    #[error("norm bound violated: {0}")]
    NormBound(String),

    #[error("float overflow in layer {layer}")]
    FloatOverflow { layer: usize },

    #[error("weight not representable at {digits} digits: {weight}")]
    NotRepresentable { weight: String, digits: u32 },

    #[error("embedding failed at layer {layer}, unit {unit}")]
    EmbedFailure { layer: usize, unit: String },

    #[error("embedding failed after {attempts} resampling attempts (last: layer {layer}, unit {unit})")]
    EmbedExhausted {
        attempts: u32,
        layer: usize,
        unit: String,
    },

    #[error("verification mismatch at point {point}: expected {expected}, got {got}")]
    Mismatch {
        point: String,
        expected: String,
        got: String,
    },

    #[error("missing certificate: {0}")]
    MissingCertificate(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

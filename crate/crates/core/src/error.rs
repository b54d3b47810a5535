use std::io;

use thiserror::Error;

/// Errors produced by fitting, forecasting, ingestion and evaluation.
#[derive(Debug, Error)]
pub enum GreyError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("insufficient data: need at least {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("singular or near-singular system (condition estimate {condition:e})")]
    SingularSystem { condition: f64 },

    #[error("numerical degeneracy: {0}")]
    NumericalDegeneracy(String),

    #[error("calibration failed: {0}")]
    CalibrationFailed(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl GreyError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        GreyError::InvalidInput(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, GreyError>;

use thiserror::Error;

use ordershap_core::ShapError;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Shap(#[from] ShapError),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed data: {0}")]
    Data(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = BenchError> = std::result::Result<T, E>;

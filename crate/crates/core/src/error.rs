use thiserror::Error;

/// Errors raised by model construction, cost evaluation and the attribution routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ShapError {
    #[error("dimension mismatch: expected {expected} features, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite input value at feature {index}")]
    NonFiniteInput { index: usize },

    #[error("model returned a non-finite value ({value})")]
    NonFiniteOutput { value: f64 },

    #[error("model evaluation failed: {0}")]
    Evaluation(String),

    #[error("feature index {index} out of range for p = {p}")]
    FeatureOutOfRange { index: usize, p: usize },

    #[error("feature {index} repeated within a single term")]
    RepeatedFeature { index: usize },

    #[error("duplicate term over features {vars:?} with conflicting coefficients {first} and {second}")]
    ConflictingTerm { vars: Vec<usize>, first: f64, second: f64 },

    #[error("malformed model spec: {0}")]
    MalformedSpec(String),

    #[error("p = {p} exceeds the limit of {limit} for {method}")]
    TooManyFeatures { p: usize, limit: usize, method: &'static str },

    #[error("component over {size} features exceeds the enumeration limit of {limit}")]
    ComponentTooLarge { size: usize, limit: usize },

    #[error("invalid order K = {order} for p = {p}: {reason}")]
    InvalidOrder { order: usize, p: usize, reason: &'static str },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("empty dataset")]
    EmptyDataset,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T, E = ShapError> = std::result::Result<T, E>;

use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("non-finite {quantity} at x = {x:?}")]
    EvaluationFailure { quantity: &'static str, x: Vec<f64> },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("non-finite matrix entry")]
    NonFiniteMatrix,

    #[error("eigenpair residual {residual:e} exceeds tolerance {tolerance:e}")]
    EigenResidual { residual: f64, tolerance: f64 },

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("direction condition violated: {condition} (value {value:e})")]
    ConditionViolation { condition: &'static str, value: f64 },

    #[error("batch size {batch} exceeds component count {components}")]
    BatchTooLarge { batch: usize, components: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dataset schema: {0}")]
    Schema(String),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }
}

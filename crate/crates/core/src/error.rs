use alloc::string::String;

/// Errors produced by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("state is not normalized (norm^2 = {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },
    #[error("resource limit: {0}")]
    ResourceLimit(String),
    #[error("parameter reference {index} out of range ({n_params} parameters)")]
    ParamOutOfRange { index: usize, n_params: usize },
    #[error("cost functional has no analytic derivative")]
    UnsupportedCost,
    #[error("all {0} trials failed")]
    AllTrialsFailed(usize),
    #[error("non-finite cost encountered")]
    NonFinite,
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameters(msg.into())
}

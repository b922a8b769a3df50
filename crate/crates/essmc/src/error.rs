use thiserror::Error;

#[derive(Debug, Error)]
pub enum EssmcError {
    /// Structurally invalid configuration (bad field values, missing
    /// required parameters, unknown controller kind).
    #[error("config error: {0}")]
    Config(String),

    /// Non-finite state or input reached the integrator.
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Parameters are structurally valid but violate a convergence or
    /// feasibility condition.
    #[error("infeasible parameters: {0}")]
    Infeasible(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

use thiserror::Error;

/// Errors raised by the analytic and simulation layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The input process is nondecreasing, so `phi(alpha) = lambda` has no positive root.
    #[error("input process is a subordinator: phi(alpha) never reaches lambda")]
    SubordinatorInput,

    /// Adaptive quadrature could not reach the requested tolerance.
    #[error("quadrature failed in {context}: error estimate {estimate:e} exceeds tolerance {tolerance:e}")]
    QuadratureFailure {
        context: &'static str,
        estimate: f64,
        tolerance: f64,
    },

    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A model or collapse law has invalid parameters.
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// Statistics were requested from a pool with no samples.
    #[error("sample pool is empty")]
    EmptyPool,

    /// The requested transform argument is not on the pool's accumulation grid.
    #[error("alpha {0} is not on the pool's accumulation grid")]
    AlphaNotTracked(f64),

    /// No exact sampler for `(W_tau, L_tau)` exists for this model.
    #[error("no exact W_tau sampler: {0}")]
    NoExactSampler(String),

    /// Engine configuration is inconsistent with the model.
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors raised by the analytic engine, the oracles and the CLI layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown dimension `{0}`")]
    UnknownDimension(String),

    #[error("scale `{name}` must be finite and positive, got {value}")]
    NonPositiveScale { name: &'static str, value: f64 },

    #[error("{quantity} = {value:e} is outside the perturbative regime")]
    PerturbativeRegime { quantity: &'static str, value: f64 },

    #[error("ratio undefined: {0}")]
    UndefinedRatio(&'static str),

    #[error("single-photon detuning is zero; adiabatic elimination is singular")]
    SingularDetuning,

    #[error("laser dispersion fixed point did not converge after {iterations} iterations")]
    DispersionConsistency { iterations: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("guard `{name}` violated: {value:e} exceeds limit {limit:e}")]
    Guard { name: &'static str, value: f64, limit: f64 },

    #[error("integrator did not converge after {halvings} step halvings (last change {change:e})")]
    Stiffness { halvings: usize, change: f64 },

    #[error("grid boundary density {ratio:e} of peak exceeds {limit:e}")]
    BoundaryLeak { ratio: f64, limit: f64 },

    #[error("grid convergence gate failed: halving the time step changed phases by {change:e} (limit {limit:e})")]
    ConvergenceGate { change: f64, limit: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("snapshot format error: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

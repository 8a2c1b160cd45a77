use alloc::string::String;

/// Errors produced by the model, pressure, solver and oracle layers.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("lattice tail bound {tail:.3e} exceeds tolerance {tol:.3e}")]
    TailNotConverged { tail: f64, tol: f64 },

    #[error("unstable mode: f = {f} < |h| = {h_abs}")]
    UnstableMode { f: f64, h_abs: f64 },

    #[error("infeasible point: {0}")]
    InfeasiblePoint(String),

    #[error("quadrature did not reach tolerance: estimate {estimate:.3e}, error {error:.3e}")]
    QuadratureFailure { estimate: f64, error: f64 },

    #[error("density stationarity violated: |dp/drho| = {residual:.3e}")]
    StationarityViolated { residual: f64 },

    #[error("no bracket for the inner minimizer: {0}")]
    BracketFailure(String),

    #[error("eta continuation diverged at eta = {eta:.3e}")]
    ContinuationDiverged { eta: f64 },

    #[error("Fock space dimension {dim} exceeds limit {limit}")]
    DimensionExceeded { dim: usize, limit: usize },

    #[error("eigendecomposition failed: {0}")]
    EigenFailure(String),

    #[error("operator inequality violated: {0}")]
    InequalityViolated(String),
}

pub type Result<T> = core::result::Result<T, Error>;

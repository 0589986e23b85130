use fuchsol_core::CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("quadrature did not converge: error estimate {estimate:e}, requested {requested:e}")]
    Quadrature { estimate: f64, requested: f64 },
    #[error(transparent)]
    Core(#[from] CoreError),
}

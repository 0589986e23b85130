use fuchsol_core::CoreError;
use fuchsol_numerics::NumericsError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum WaveError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("point outside the chart: {0}")]
    Domain(String),
    #[error("(t, rho) = ({t}, {rho}) lies on neither boundary component")]
    NotOnBoundary { t: f64, rho: f64 },
    #[error("lambda = {0} > 1: the nonlinear singular term is no longer O(U)")]
    LambdaTooLarge(f64),
    #[error("nonlinearity is not symmetric in (I, J): q^{k}_{{{i}{j}}} differs from q^{k}_{{{j}{i}}} by {gap}")]
    Asymmetric { k: usize, i: usize, j: usize, gap: f64 },
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

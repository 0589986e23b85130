use fuchsol_core::CoreError;
use fuchsol_minkowski::WaveError;
use fuchsol_numerics::NumericsError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SchwarzschildError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("point outside the chart: {0}")]
    Domain(String),
    #[error("2 - tA = {value} <= 0 at (t, r) = ({t}, {r}): the system is not hyperbolic there")]
    NotHyperbolic { t: f64, r: f64, value: f64 },
    #[error(transparent)]
    Wave(#[from] WaveError),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

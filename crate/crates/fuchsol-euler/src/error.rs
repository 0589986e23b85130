use fuchsol_core::CoreError;
use fuchsol_numerics::NumericsError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EulerError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("Gamma = {0} lies outside (0, 1); the experiment is only defined there")]
    OutOfRegime(f64),
    #[error("characteristic degeneracy: (v0)^2 = (v1)^2 = {0}")]
    Degenerate(f64),
    #[error("fluid vector is not timelike: V^2 = {0}")]
    NotTimelike(f64),
    #[error("density positivity lost at t = {t}, x = {x}: 1 + U0 + u0 = {value}")]
    Positivity { t: f64, x: f64, value: f64 },
    #[error("time must be negative, got {0}")]
    Time(f64),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

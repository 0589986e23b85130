use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoreError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("B0 is not positive definite at t={t}, x={x} (smallest eigenvalue {min_eig:e})")]
    NotPositiveDefinite { t: f64, x: f64, min_eig: f64 },
    #[error("B0 is singular at t={t}, x={x}")]
    SingularB0 { t: f64, x: f64 },
    #[error("sample outside the admissible domain: {0}")]
    Domain(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
}

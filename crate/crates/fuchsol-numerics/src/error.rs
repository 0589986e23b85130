use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("unsupported stencil order {0} (use 2, 4 or 6)")]
    UnsupportedOrder(usize),
    #[error("grid with {n} points is too small for a stencil of half-width {half_width}")]
    GridTooSmall { n: usize, half_width: usize },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("B0 is singular at t={t}, x={x} (grid index {index})")]
    SingularB0 { t: f64, x: f64, index: usize },
    #[error("state left the admissible ball at t={t}, x={x} (grid index {index}): |v| = {norm} >= R = {radius}")]
    DomainExit { t: f64, x: f64, index: usize, norm: f64, radius: f64 },
    #[error("time must stay negative: {0}")]
    Time(String),
    #[error("non-finite value at t={t}")]
    NonFinite { t: f64 },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error(transparent)]
    Core(#[from] fuchsol_core::CoreError),
}

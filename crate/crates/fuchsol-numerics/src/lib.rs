//! Method-of-lines machinery for Fuchsian systems on a periodic interval:
//! grids and fields, centred stencils, discrete Sobolev norms,
//! Kreiss–Oliger filtering and a classical RK4 integrator whose step shrinks
//! in proportion to |t| as the singular time is approached.

pub mod analysis;
pub mod dissipation;
pub mod error;
pub mod field;
pub mod integrator;
pub mod norms;
pub mod record;
pub mod stencil;

pub use analysis::{
    energy_estimate_check, fit_power_law, limit_extract, DecaySeries, EnergyCheck, FitResult, LimitEstimate,
};
pub use dissipation::kreiss_oliger;
pub use error::NumericsError;
pub use field::{Field, PeriodicGrid};
pub use integrator::{
    energy_identity_residual, evolve, lambda_max, rhs, step, IdentityResidual, Monitors, StepSchedule,
};
pub use norms::{projected_sobolev_norm, sobolev_norm, sobolev_norms_upto, sobolev_parts};
pub use record::{RecordRow, RunRecord, RunStatus};
pub use stencil::derivative;

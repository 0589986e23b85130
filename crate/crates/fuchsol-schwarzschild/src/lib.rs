//! Semilinear wave equations near spatial infinity of a Schwarzschild
//! spacetime of mass `μ`.
//!
//! The conformal compactification is reached as `t → 0⁺` and, unlike the
//! Minkowski case, the coefficients depend on the radius `r = ρ^m`. The
//! extension to the torus freezes them at `r = 0` outside the physical
//! region; the audit in [`audit`] measures how close the extended system is
//! to its frozen limit and fixes `m` and `ρ₀` from those measurements.

pub mod audit;
pub mod background;
pub mod error;
pub mod experiment;
pub mod system;

pub use audit::{
    audit_model, boundary_audit, coercivity, flux_halving, select, taylor_constant, taylor_slopes, Coercivity, FluxHalving,
    SchwarzschildAudit, Selection, TaylorSlopes,
};
pub use background::{background_functions, BackgroundFns};
pub use error::SchwarzschildError;
pub use experiment::{
    fitted_rate, mass_sweep, run_schwarzschild, MassSweep, SchwarzschildConfig, SchwarzschildOutcome, SchwarzschildReport,
};
pub use system::{first_order_coeffs, frozen_coeffs, SchwarzschildChart, SchwarzschildForm, SchwarzschildModel, Variant};

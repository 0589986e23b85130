//! Systems of semilinear wave equations with quadratic derivative
//! nonlinearities near spatial infinity of Minkowski space.
//!
//! After a conformal compactification that turns spatial infinity into a
//! cylinder reached as `t → 0⁺`, the wave equations become a Fuchsian system
//! in first-order variables. Cutting the radial coefficients off and
//! extending periodically gives a system on a torus whose solutions restrict
//! to solutions on the physical region. The generic parts of that
//! construction live in [`wave`] and [`run`] and are shared with the
//! Schwarzschild crate.

pub mod conformal;
pub mod cutoff;
pub mod error;
pub mod experiment;
pub mod minkowski;
pub mod nonlinearity;
pub mod run;
pub mod wave;

pub use conformal::{chart_inverse, chart_map, conformal_data, conformal_source, ConformalData, ConformalPoint};
pub use cutoff::{chi_hat, chi_hat_prime, Cutoff};
pub use error::WaveError;
pub use experiment::{run_minkowski, MChoice, MinkowskiConfig, MinkowskiOutcome, MinkowskiReport};
pub use minkowski::{
    boundary_audit, boundary_form, boundary_form_closed, coercivity_check, first_order_coeffs, BoundaryAudit,
    CoercivityReport, FirstOrderForm, MinkowskiChart, MinkowskiModel, DEFAULT_RHO0,
};
pub use nonlinearity::{Nonlinearity, QSpec};
pub use run::{
    constraint_residual, decay_bound_check, default_wave_schedule, initial_state, physical_time_csv, reconstruction_csv,
    restriction_gap, run_wave, wave_grid, DecayBound, WaveData, WaveRunSettings,
};
pub use wave::{
    choose_m, extended_system, flux_gradient_bound, kappa_of, FluxBound, SourceModel, WaveCoefficients, WaveLayout,
    WaveModel, LAMBDA_THRESHOLD, WAVE_RADIUS,
};

//! Perfect fluids with Gowdy symmetry on a fixed Kasner background, near
//! the big bang.
//!
//! The symmetry-reduced Euler equations for `V = (V⁰, V¹)` are rewritten
//! in the time `t = −(−τ)^Γ` relative to a background solution and cast as
//! a Fuchsian system with `ℙ = diag(0, 1)`: the density perturbation `u⁰`
//! tends to a limit (the shift in the asymptotic datum `V_*`) while the
//! velocity perturbation `u¹` decays.

pub mod background;
pub mod error;
pub mod experiment;
pub mod fuchsian;
pub mod params;
pub mod physical;

pub use background::{
    from_perturbation, positivity_margin, t_to_tau, tau_to_t, to_perturbation, Background, BackgroundPoint,
    RestBackground,
};
pub use error::EulerError;
pub use experiment::{
    convergence_study, initial_data, run_stability_experiment, ConvergenceReport, DataProfile, EulerReport, ExperimentConfig, ExperimentOutcome,
};
pub use fuchsian::{f0_regularity_audit, fuchsian_form, EulerCoefficients, F0Audit, EULER_RADIUS};
pub use params::{big_gamma, kasner_exponents, observables, KasnerParams};
pub use physical::{physical_coeffs, physical_rhs, rest_residual, rest_solution, PhysicalCoeffs};

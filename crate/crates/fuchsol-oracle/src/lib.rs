//! Exact reference problems.
//!
//! The two-component model `∂ₜu = (1/t)diag(0,a)u + |t|^{−(1−p)}F̃(t)` is
//! solved in closed form (up to one-dimensional quadrature) and exposed as a
//! [`FuchsianSystem`](fuchsol_core::FuchsianSystem) so the numerical
//! integrator can be checked against it. The time change `τ = −(−t)^p`
//! maps systems with fractional singular weights to the standard `p = 1`
//! form.

pub mod error;
pub mod heuristic;
pub mod quadrature;
pub mod transform;

pub use error::OracleError;
pub use heuristic::{
    as_fuchsian, decay_check, exact_solution, limit_u1, log_grid, oracle_csv, oracle_table, BoundCheck, DecayReport,
    Forcing, HeuristicProblem, OracleRow, TrigSeries, TrigTerm,
};
pub use quadrature::{integrate, Quadrature};
pub use transform::{
    compare_transformed_prediction, map_prediction, map_time, transform_case_table, transform_system, Direction,
    TimeTransform, TransformCaseResult,
};

//! Experiment driver: JSON configurations, runs with manifests, structural
//! checks, power-law fits and the acceptance suite behind the `fuchsol`
//! binary.

pub mod acceptance;
pub mod check;
pub mod config;
pub mod error;
pub mod fit;
pub mod manifest;
pub mod ode;
pub mod runner;

pub use acceptance::{parse_criteria, run_criterion, to_tsv, Clause, CriterionResult, CRITERIA};
pub use check::{build_system, check_system, gate_enforced};
pub use config::{LabConfig, SystemKind, SystemParams, SCHEMA, SEED_ENV};
pub use error::LabError;
pub use fit::{fit_csv, fit_file, FitOutput};
pub use manifest::{GridInfo, RunManifest};
pub use ode::{run_ode, OdeConfig, OdeOutcome, OdeReport};
pub use runner::{run_experiment, RunSummary};

//! Structural checks of the registered systems.

use std::sync::Arc;

use fuchsol_core::{audit_system, AuditOptions, FuchsianSystem, StructuralReport};
use fuchsol_euler::{fuchsian_form, RestBackground};
use fuchsol_minkowski::experiment::{build_model, nonlinearity_from};
use fuchsol_minkowski::extended_system;
use fuchsol_oracle::as_fuchsian;

use crate::config::{LabConfig, SystemKind, SystemParams};
use crate::error::LabError;

/// The Fuchsian system described by a configuration.
pub fn build_system(cfg: &LabConfig) -> Result<FuchsianSystem, LabError> {
    match &cfg.params {
        SystemParams::Ode(c) => as_fuchsian(&c.problem()?).map_err(LabError::run),
        SystemParams::Euler(c) => {
            let bg = Arc::new(RestBackground::new(c.v_star).map_err(LabError::run)?);
            fuchsian_form(bg, &c.params().map_err(LabError::run)?, c.radius).map_err(LabError::run)
        }
        SystemParams::Minkowski(c) => {
            let (model, _) = build_model(c).map_err(LabError::run)?;
            let q = nonlinearity_from(&c.q, c.n_fields).map_err(LabError::run)?;
            extended_system(Arc::new(model), q, c.radius).map_err(LabError::run)
        }
        SystemParams::Schwarzschild(c) => {
            let sel = c.selection().map_err(LabError::run)?;
            let model = c.model(&sel).map_err(LabError::run)?;
            let q = nonlinearity_from(&c.q, c.n_fields).map_err(LabError::run)?;
            extended_system(Arc::new(model), q, c.radius).map_err(LabError::run)
        }
    }
}

/// Whether the κ-gate is part of the pass condition. For the wave systems
/// the gate depends on the choice of `m` and is reported only.
pub fn gate_enforced(system: SystemKind) -> bool {
    matches!(system, SystemKind::Ode | SystemKind::Euler)
}

pub fn check_system(cfg: &LabConfig, samples: usize) -> Result<StructuralReport, LabError> {
    if samples == 0 {
        return Err(LabError::Usage("--samples must be positive".into()));
    }
    let sys = build_system(cfg)?;
    let mut opts = AuditOptions::new(sys.default_samples(samples, cfg.seed));
    opts.enforce_gate = gate_enforced(cfg.system);
    audit_system(&sys, &opts).map_err(LabError::run)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heuristic_and_euler_pass_with_the_gate() {
        for s in [SystemKind::Ode, SystemKind::Euler] {
            let r = check_system(&LabConfig::default_for(s), 200).unwrap();
            assert!(r.pass && r.kappa_gate.pass, "{s:?}: {:?}", r.violations);
        }
    }

    #[test]
    fn zero_samples_is_a_usage_error() {
        assert_eq!(check_system(&LabConfig::default_for(SystemKind::Ode), 0).unwrap_err().exit_code(), 2);
    }
}

use std::f64::consts::PI;
use std::sync::Arc;

use fuchsol_core::{audit_system, AuditOptions};
use fuchsol_euler::{
    convergence_study, fuchsian_form, rest_residual, run_stability_experiment, ExperimentConfig, KasnerParams,
    RestBackground, EULER_RADIUS,
};
use fuchsol_numerics::PeriodicGrid;

fn params() -> KasnerParams {
    KasnerParams::new(1.0, 4.0 / 3.0).unwrap()
}

#[test]
fn rest_solution_has_vanishing_discrete_rhs() {
    let grid = PeriodicGrid::new(64, 2.0 * PI).unwrap();
    for v_star in [0.5, 1.0, 3.0] {
        for tau in [-1.0, -0.1, -1e-4] {
            assert!(rest_residual(grid, tau, &params(), v_star).unwrap() <= 1e-12);
        }
    }
}

#[test]
fn structural_audit_passes_with_measured_constants() {
    let sys = fuchsian_form(Arc::new(RestBackground::new(1.0).unwrap()), &params(), EULER_RADIUS).unwrap();
    let report = audit_system(&sys, &AuditOptions::new(sys.default_samples(1000, 7))).unwrap();
    assert!(report.violations.is_empty(), "{:?}", report.violations);
    assert!(report.kappa_gate.pass);
    assert!(report.residuals.commutator <= 1e-10);
    assert!(report.residuals.b0_symmetry <= 1e-10 && report.residuals.b1_symmetry <= 1e-10);
}

#[test]
fn kappa_gate_fails_on_a_larger_ball() {
    let sys = fuchsian_form(Arc::new(RestBackground::new(1.0).unwrap()), &params(), 0.1).unwrap();
    let mut opts = AuditOptions::new(sys.default_samples(1000, 7));
    opts.enforce_gate = false;
    let report = audit_system(&sys, &opts).unwrap();
    assert!(!report.kappa_gate.pass);
    assert!(report.violations.is_empty(), "{:?}", report.violations);
}

#[test]
fn small_perturbation_decays_and_converges() {
    let out = run_stability_experiment(&ExperimentConfig::default()).unwrap();
    let r = &out.report;
    assert!(r.pass_flags.completed);
    assert!(r.fitted_exponents.u1.unwrap() >= 0.9, "{r:?}");
    assert!(r.pass_flags.vstar_close, "{r:?}");
    // ‖u⁰ − u⁰(0)‖ decays at least as fast as the |t| bound.
    assert!(r.pass_flags.u0_rate_bound, "{r:?}");
    assert!(r.positivity_min > 0.99);
    let lim = out.u0_limit.unwrap();
    assert!((lim.max_abs() - 1e-3).abs() < 2e-4);
}

#[test]
fn convergence_orders_on_a_smooth_run() {
    let cfg = ExperimentConfig { delta: 0.02, t_floor: -0.1, ..Default::default() };
    let c = convergence_study(&cfg).unwrap();
    assert!(c.spatial_order >= 3.5, "{c:?}");
    assert!(c.temporal_order >= 3.8, "{c:?}");
    assert!(c.energy_residual < 1e-3, "{c:?}");
}

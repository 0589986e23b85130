use fuchsol_core::{audit_system, AuditOptions, SampleSpec};
use fuchsol_schwarzschild::{mass_sweep, run_schwarzschild, SchwarzschildConfig};

#[test]
fn default_run_meets_the_audit_and_decay_targets() {
    let out = run_schwarzschild(&SchwarzschildConfig::default()).unwrap();
    let r = &out.report;
    println!("{}", serde_json::to_string_pretty(r).unwrap());
    let a = &r.audit;
    assert!((a.slopes.b0 - 2.0).abs() <= 0.1 && (a.slopes.bc - 2.0).abs() <= 0.1, "{:?}", a.slopes);
    assert!(a.flux_halving.pass, "{:?}", a.flux_halving);
    assert!(a.boundary.pass, "{:?}", a.boundary);
    assert!(a.coercivity_margin.pass);
    assert!(a.measured_bounds.continuity <= 1e-10);
    assert!(a.measured_bounds.flux_gradient.sup < 0.05);
    assert!(a.chosen_rho0 < 1.0 / 3.0 && 3.0 * a.chosen_rho0 < 0.9);
    assert!(a.pass);
    assert!(r.completed && r.decay.pass, "{:?}", r.decay);
    assert!(r.restriction_gap <= 1e-8, "{}", r.restriction_gap);
    assert!(r.constraint_final <= 1.5 * r.constraint_initial + 1e-12);
    assert!(r.runtime_seconds < 180.0);
}

#[test]
fn structural_audit_of_the_extended_system() {
    let cfg = SchwarzschildConfig { m: fuchsol_minkowski::MChoice::Fixed(8), rho0: Some(0.1), ..Default::default() };
    let sel = cfg.selection().unwrap();
    let model = std::sync::Arc::new(cfg.model(&sel).unwrap());
    let sys = fuchsol_minkowski::extended_system(model, fuchsol_minkowski::Nonlinearity::scalar(1.0), 0.1).unwrap();
    let mut opts = AuditOptions::new(SampleSpec { count: 300, seed: 11, t_window: sys.t_window, radius_fraction: 0.9 });
    opts.enforce_gate = false;
    let rep = audit_system(&sys, &opts).unwrap();
    assert!(rep.violations.is_empty(), "{:?}", rep.violations);
    assert!(rep.residuals.b0_symmetry <= 1e-10 && rep.residuals.b1_symmetry <= 1e-10);
}

#[test]
fn decay_rate_does_not_depend_on_the_mass() {
    let cfg = SchwarzschildConfig { n_points: 256, ..Default::default() };
    let sweep = mass_sweep(&cfg, &[0.5, 1.0, 2.0], 0.02).unwrap();
    println!("{sweep:?}");
    assert!(sweep.pass, "{sweep:?}");
}

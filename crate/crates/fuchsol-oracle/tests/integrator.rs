//! The numerical integrator against the closed-form model solution.

use fuchsol_core::stats::loglog_fit;
use fuchsol_core::{audit_system, AuditOptions};
use fuchsol_numerics::{evolve, Field, Monitors, PeriodicGrid, RunRecord, StepSchedule};
use fuchsol_oracle::{
    as_fuchsian, exact_solution, limit_u1, map_time, transform_system, Direction, Forcing, HeuristicProblem,
};

fn problem(a: f64, p: f64) -> HeuristicProblem {
    HeuristicProblem::new(a, p, Forcing::default(), 0.5, 1.0).unwrap()
}

fn run(prob: &HeuristicProblem, t_floor: f64, transform_p: Option<f64>) -> RunRecord {
    let mut sys = as_fuchsian(prob).unwrap();
    let mut t0 = -1.0;
    let mut floor = t_floor;
    if let Some(p) = transform_p {
        sys = transform_system(&sys, p).unwrap();
        t0 = map_time(t0, p, Direction::Forward).unwrap();
        floor = map_time(t_floor, p, Direction::Forward).unwrap();
    }
    let grid = PeriodicGrid::new(8, 2.0 * std::f64::consts::PI).unwrap();
    let data = prob.initial_data();
    let init = Field::from_fn(grid, 2, t0, |_| data.to_vec());
    let sched = StepSchedule { t_floor: floor, singular_factor: 0.004, dt_max: 0.004, ..Default::default() };
    let mon = Monitors { identity_every: 0, log_ratio: 0.8, keep_snapshots: true, ..Default::default() };
    let rec = evolve(&sys, &init, &sched, &mon).unwrap();
    assert!(rec.completed(), "{:?}", rec.status);
    rec
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn endpoint_matches_closed_form() {
    for a in [0.3, 0.5, 1.0, 2.0] {
        for p in [0.4, 1.0] {
            let prob = problem(a, p);
            let rec = run(&prob, -1e-3, None);
            let (u1, u2) = exact_solution(&prob, -1e-3).unwrap();
            let f = &rec.final_field;
            let (e1, e2) = (rel(f.values[0], u1), rel(f.values[1], u2));
            assert!(e1 <= 1e-6 && e2 <= 1e-6, "a={a} p={p}: {e1:e} {e2:e}");
        }
    }
}

#[test]
fn fitted_decay_of_the_decaying_component() {
    for (a, p) in [(0.3, 1.0), (2.0, 0.4)] {
        let prob = problem(a, p);
        let rec = run(&prob, -1e-8, None);
        let pts: Vec<(f64, f64)> =
            rec.snapshots.iter().filter(|s| s.time > -1e-6).map(|s| (-s.time, s.values[1].abs())).collect();
        let (ts, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        let slope = loglog_fit(&ts, &ys).unwrap().slope;
        assert!((slope - a.min(p)).abs() < 0.02, "a={a} p={p}: slope {slope}");
    }
}

#[test]
fn limit_of_the_persistent_component() {
    let prob = problem(0.5, 0.4);
    let rec = run(&prob, -1e-8, None);
    let n = rec.snapshots.len();
    let (s1, s2) = (&rec.snapshots[n - 2], &rec.snapshots[n - 1]);
    let (w1, w2) = ((-s1.time).powf(0.4), (-s2.time).powf(0.4));
    let extrapolated = (s2.values[0] * w1 - s1.values[0] * w2) / (w1 - w2);
    let exact = limit_u1(&prob).unwrap();
    assert!((extrapolated - exact).abs() < 1e-8, "{extrapolated} vs {exact}");
}

#[test]
fn time_change_commutes_with_evolution() {
    let prob = problem(1.0, 0.4);
    let direct = run(&prob, -1e-3, None);
    let mapped = run(&prob, -1e-3, Some(0.4));
    for c in 0..2 {
        let e = rel(mapped.final_field.values[c], direct.final_field.values[c]);
        assert!(e < 1e-5, "component {c}: {e:e}");
    }
}

#[test]
fn transformed_source_is_bounded() {
    let prob = problem(1.0, 0.4);
    let sys = transform_system(&as_fuchsian(&prob).unwrap(), 0.4).unwrap();
    let v = nalgebra::DVector::zeros(2);
    let near = sys.coeffs.f(-1e-12, 0.0, &v);
    let far = sys.coeffs.f(-0.5, 0.0, &v);
    assert!(near.amax() < 10.0 && far.amax() < 10.0);
}

#[test]
fn model_system_passes_the_structural_audit() {
    let sys = as_fuchsian(&problem(0.7, 0.5)).unwrap();
    let spec = sys.default_samples(300, 9);
    let report = audit_system(&sys, &AuditOptions::new(spec)).unwrap();
    assert!(report.pass, "{:?}", report.violations);
    assert!((report.constants.kappa - 0.7).abs() < 1e-12);
    assert!(report.kappa_gate.pass);
}

use std::f64::consts::PI;
use std::sync::Arc;

use fuchsol_core::{Coefficients, ConstantCoefficients, FuchsianSystem, ProjectionPair};
use fuchsol_numerics::{evolve, Field, Monitors, PeriodicGrid, StepSchedule};
use nalgebra::{DMatrix, DVector};

/// `u_t + c u_x = (a/t) u`, solved by `(t/t0)^a g(x − c(t − t0))`.
fn transport(a: f64, c: f64) -> FuchsianSystem {
    let coeffs = ConstantCoefficients {
        b0: DMatrix::identity(1, 1),
        b1: DMatrix::from_element(1, 1, c),
        bc: DMatrix::from_element(1, 1, a),
        f: DVector::zeros(1),
    };
    FuchsianSystem::new("transport", ProjectionPair::identity(1), Arc::new(coeffs), 10.0).unwrap()
}

fn transport_error(n: usize) -> f64 {
    let (a, c, t0, t1) = (0.5, 1.0, -1.0, -0.01);
    let sys = transport(a, c);
    let grid = PeriodicGrid::new(n, 2.0 * PI).unwrap();
    let init = Field::from_fn(grid, 1, t0, |x| vec![x.sin().exp()]);
    let sched = StepSchedule { t_floor: t1, cfl: 0.2, singular_factor: 0.005, ..Default::default() };
    let mon = Monitors { identity_every: 0, ..Default::default() };
    let rec = evolve(&sys, &init, &sched, &mon).unwrap();
    assert!(rec.completed());
    let f = &rec.final_field;
    let scale = (t1 / t0).powf(a);
    (0..n)
        .map(|j| (f.values[j] - scale * (grid.x(j) - c * (t1 - t0)).sin().exp()).abs())
        .fold(0.0, f64::max)
}

#[test]
fn transport_converges_at_fourth_order() {
    let (e1, e2) = (transport_error(32), transport_error(64));
    assert!(e2 < 1e-4, "error {e2}");
    let rate = (e1 / e2).log2();
    assert!(rate > 3.5, "observed order {rate}");
}

/// Quasilinear system with variable, state-dependent B⁰ and B¹.
struct Quasi;

impl Coefficients for Quasi {
    fn dim(&self) -> usize {
        2
    }
    fn b0(&self, _t: f64, x: f64, v: &DVector<f64>) -> DMatrix<f64> {
        let s = 1.0 + 0.2 * x.sin() + 0.3 * v[1] * v[1];
        DMatrix::from_row_slice(2, 2, &[s, 0.1, 0.1, 1.0])
    }
    fn b1(&self, t: f64, x: f64, v: &DVector<f64>) -> DMatrix<f64> {
        let c = (0.5 + 0.1 * v[0]) * (1.0 + 0.1 * x.cos()) * (1.0 + 0.2 * t);
        DMatrix::from_row_slice(2, 2, &[0.0, c, c, 0.2])
    }
    fn bc(&self, _t: f64, _x: f64, _v: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 0.0]))
    }
    fn f(&self, t: f64, x: f64, v: &DVector<f64>) -> DVector<f64> {
        DVector::from_vec(vec![0.1 * x.cos() * t, v[0] * v[1]])
    }
}

#[test]
fn energy_identity_holds_along_a_quasilinear_run() {
    let sys = FuchsianSystem::new("quasi", ProjectionPair::diagonal(&[true, false]), Arc::new(Quasi), 2.0).unwrap();
    let grid = PeriodicGrid::new(96, 2.0 * PI).unwrap();
    let init = Field::from_fn(grid, 2, -1.0, |x| vec![0.3 * x.sin(), 0.2 * (2.0 * x).cos()]);
    let sched = StepSchedule { t_floor: -1e-3, ..Default::default() };
    let rec = evolve(&sys, &init, &sched, &Monitors::default()).unwrap();
    assert!(rec.completed(), "{:?}", rec.status);
    let worst = rec.rows.iter().skip(1).map(|r| r.identity_residual).fold(0.0, f64::max);
    assert!(worst < 1e-3, "identity residual {worst}");
    assert!(rec.rows.windows(2).all(|w| w[1].t > w[0].t));
    // ℙu decays like |t|² here, so the singular sink stays finite.
    assert!(rec.rows.last().unwrap().pu_integral.is_finite());
}

#[test]
fn csv_layout_and_stability() {
    let sys = transport(1.0, 0.5);
    let grid = PeriodicGrid::new(16, 2.0 * PI).unwrap();
    let init = Field::from_fn(grid, 1, -1.0, |x| vec![x.cos()]);
    let sched = StepSchedule { t_floor: -0.1, ..Default::default() };
    let mon = Monitors { k_reg: 3, ..Default::default() };
    let a = evolve(&sys, &init, &sched, &mon).unwrap().to_csv();
    let b = evolve(&sys, &init, &sched, &mon).unwrap().to_csv();
    assert_eq!(a, b);
    let header = a.lines().next().unwrap();
    assert_eq!(header, "t,dt,L2,H1,H2,H3,P_L2,P_Hk1,Pperp_Hk1,energy_Q,identity_residual");
    assert!(a.lines().skip(1).all(|l| l.split(',').count() == 11));
}

#[test]
fn logging_is_geometric() {
    let sys = transport(0.0, 0.0);
    let grid = PeriodicGrid::new(16, 1.0).unwrap();
    let init = Field::zeros(grid, 1, -1.0);
    let sched = StepSchedule { t_floor: -1e-4, ..Default::default() };
    let rec = evolve(&sys, &init, &sched, &Monitors::default()).unwrap();
    let ts = rec.times();
    assert_eq!(ts[0], -1.0);
    assert_eq!(*ts.last().unwrap(), -1e-4);
    // One row per factor 0.9 in |t|, give or take the step granularity.
    let expected = (1e-4f64).ln() / 0.9f64.ln();
    assert!((ts.len() as f64 - expected).abs() < 4.0, "{} rows", ts.len());
}

//! The heuristic model problem driven through the numerical integrator and
//! compared with its closed-form solution.

use serde::{Deserialize, Serialize};

use fuchsol_core::stats::loglog_fit;
use fuchsol_numerics::{evolve, Field, Monitors, PeriodicGrid, RunRecord, StepSchedule};
use fuchsol_oracle::{
    as_fuchsian, exact_solution, limit_u1, map_time, oracle_table, transform_system, Direction, Forcing, HeuristicProblem,
    OracleRow,
};

use crate::error::LabError;

fn d_a() -> f64 {
    0.5
}
fn d_p() -> f64 {
    0.4
}
fn d_ustar() -> f64 {
    0.5
}
fn d_one() -> f64 {
    1.0
}
fn d_floor() -> f64 {
    -1e-3
}
fn d_step() -> f64 {
    0.004
}
fn d_k() -> usize {
    2
}

/// Configuration of a heuristic run from `t = −1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OdeConfig {
    #[serde(default = "d_a")]
    pub a: f64,
    #[serde(default = "d_p")]
    pub p: f64,
    #[serde(default)]
    pub forcing: Forcing,
    #[serde(default = "d_ustar")]
    pub u_star: f64,
    #[serde(default = "d_one")]
    pub u_starstar: f64,
    #[serde(default = "d_floor")]
    pub t_floor: f64,
    /// Step size relative to |t|, and the absolute cap on the step.
    #[serde(default = "d_step")]
    pub singular_factor: f64,
    #[serde(default = "d_step")]
    pub dt_max: f64,
    #[serde(default = "d_k")]
    pub k_reg: usize,
}

impl Default for OdeConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

impl OdeConfig {
    pub fn with(a: f64, p: f64, t_floor: f64) -> Self {
        Self { a, p, t_floor, ..Default::default() }
    }

    pub fn problem(&self) -> Result<HeuristicProblem, LabError> {
        HeuristicProblem::new(self.a, self.p, self.forcing.clone(), self.u_star, self.u_starstar).map_err(LabError::run)
    }

    pub fn schedule(&self) -> StepSchedule {
        StepSchedule { t_floor: self.t_floor, singular_factor: self.singular_factor, dt_max: self.dt_max, ..Default::default() }
    }
}

/// The spatially homogeneous model is posed on a small periodic grid.
pub const ODE_POINTS: usize = 8;

/// Integrates the model from `t = −1` to `cfg.t_floor`, keeping snapshots.
pub fn integrate(cfg: &OdeConfig) -> Result<RunRecord, LabError> {
    integrate_in(cfg, None)
}

/// As [`integrate`], but with `transform = Some(p)` the system is first
/// rewritten in the time `τ = −(−t)^p` and run between the mapped times.
pub fn integrate_in(cfg: &OdeConfig, transform: Option<f64>) -> Result<RunRecord, LabError> {
    let prob = cfg.problem()?;
    let mut sys = as_fuchsian(&prob).map_err(LabError::run)?;
    let (mut t0, mut schedule) = (-1.0, cfg.schedule());
    if let Some(p) = transform {
        sys = transform_system(&sys, p).map_err(LabError::run)?;
        t0 = map_time(t0, p, Direction::Forward).map_err(LabError::run)?;
        schedule.t_floor = map_time(cfg.t_floor, p, Direction::Forward).map_err(LabError::run)?;
    }
    let grid = PeriodicGrid::new(ODE_POINTS, 2.0 * std::f64::consts::PI).map_err(LabError::run)?;
    let data = prob.initial_data();
    let init = Field::from_fn(grid, 2, t0, |_| data.to_vec());
    let mon = Monitors { k_reg: cfg.k_reg, identity_every: 0, log_ratio: 0.8, keep_snapshots: true };
    evolve(&sys, &init, &schedule, &mon).map_err(LabError::run)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OdeReport {
    pub a: f64,
    pub p: f64,
    pub t_end: f64,
    /// Relative error of `(u¹, u²)` at the final time against the closed form.
    pub endpoint_error: [f64; 2],
    /// Slope of `|u²|` over the last two decades of the run.
    pub u2_exponent: Option<f64>,
    pub expected_u2_exponent: f64,
    /// `u¹(0)` from quadrature and from the last two snapshots.
    pub u1_limit: f64,
    pub u1_limit_extrapolated: f64,
    pub completed: bool,
    pub steps: usize,
}

pub struct OdeOutcome {
    pub report: OdeReport,
    pub record: RunRecord,
    pub oracle: Vec<OracleRow>,
}

/// `u¹(0)` from the last two snapshots, assuming `u¹(t) − u¹(0) ∝ |t|^p`.
pub fn extrapolated_limit(record: &RunRecord, p: f64) -> Option<f64> {
    let n = record.snapshots.len();
    if n < 2 {
        return None;
    }
    let (s1, s2) = (&record.snapshots[n - 2], &record.snapshots[n - 1]);
    let (w1, w2) = ((-s1.time).powf(p), (-s2.time).powf(p));
    Some((s2.values[0] * w1 - s1.values[0] * w2) / (w1 - w2))
}

/// Slope of `|u²|` against `|t|` over snapshots within two decades of the end.
pub fn u2_exponent(record: &RunRecord) -> Option<f64> {
    let t_end = record.snapshots.last()?.time;
    let (ts, ys): (Vec<f64>, Vec<f64>) = record
        .snapshots
        .iter()
        .filter(|s| s.time > 100.0 * t_end)
        .map(|s| (-s.time, s.values[1].abs()))
        .unzip();
    if ts.len() < 8 || ys.iter().any(|&y| !(y > 0.0)) {
        return None;
    }
    loglog_fit(&ts, &ys).map(|f| f.slope)
}

fn rel(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        (a - b).abs() / b.abs()
    }
}

pub fn run_ode(cfg: &OdeConfig) -> Result<OdeOutcome, LabError> {
    let prob = cfg.problem()?;
    let record = integrate(cfg)?;
    let f = &record.final_field;
    let t_end = f.time;
    let (u1, u2) = exact_solution(&prob, t_end).map_err(LabError::run)?;
    let times: Vec<f64> = record.rows.iter().map(|r| r.t).collect();
    let oracle = oracle_table(&prob, &times).map_err(LabError::run)?;
    let expected = if prob.forcing.f2.is_zero() { prob.a } else { prob.a.min(prob.p) };
    let report = OdeReport {
        a: prob.a,
        p: prob.p,
        t_end,
        endpoint_error: [rel(f.values[0], u1), rel(f.values[1], u2)],
        u2_exponent: u2_exponent(&record),
        expected_u2_exponent: expected,
        u1_limit: limit_u1(&prob).map_err(LabError::run)?,
        u1_limit_extrapolated: extrapolated_limit(&record, prob.p).unwrap_or(f64::NAN),
        completed: record.completed(),
        steps: record.steps,
    };
    Ok(OdeOutcome { report, record, oracle })
}

//! The acceptance suite: nine criteria, each a list of measured clauses.
//!
//! A criterion passes when every clause passes. Clauses carry the measured
//! value and the target so a failing line says by how much it misses.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;
use std::time::Instant;

use nalgebra::{DMatrix, DVector, Matrix4};
use serde::Serialize;

use fuchsol_core::checks::Residuals;
use fuchsol_core::{div_b, ConstantCoefficients, FuchsianSystem, ProjectionPair};
use fuchsol_euler::{convergence_study, rest_residual, run_stability_experiment, ExperimentConfig, KasnerParams};
use fuchsol_minkowski::{kappa_of, run_minkowski, MinkowskiConfig};
use fuchsol_numerics::PeriodicGrid;
use fuchsol_oracle::{compare_transformed_prediction, transform_case_table};
use fuchsol_schwarzschild::{frozen_coeffs, run_schwarzschild, SchwarzschildConfig};

use crate::check::{check_system, gate_enforced};
use crate::config::{LabConfig, SystemKind};
use crate::error::LabError;
use crate::ode::{integrate_in, run_ode, OdeConfig};

pub const CRITERIA: [u8; 9] = [1, 2, 3, 4, 5, 6, 7, 8, 9];

const PAIRS: [(f64, f64); 8] = [(0.3, 0.4), (0.3, 1.0), (0.5, 0.4), (0.5, 1.0), (1.0, 0.4), (1.0, 1.0), (2.0, 0.4), (2.0, 1.0)];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Clause {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub title: String,
    pub pass: bool,
    pub clauses: Vec<Clause>,
    pub seconds: f64,
    /// Set when the measurement itself failed to run.
    pub error: Option<String>,
}

impl CriterionResult {
    pub fn clause(&self, name: &str) -> Option<&Clause> {
        self.clauses.iter().find(|c| c.name == name)
    }

    /// One human-readable line: id, verdict, title and any failing clauses.
    pub fn line(&self) -> String {
        let mut s = format!("criterion {} {} {} ({:.1} s)", self.id, if self.pass { "PASS" } else { "FAIL" }, self.title, self.seconds);
        if let Some(e) = &self.error {
            let _ = write!(s, ": error: {e}");
        }
        for c in self.clauses.iter().filter(|c| !c.pass) {
            let _ = write!(s, "; {} = {:.6e} (target {})", c.name, c.value, c.target);
        }
        s
    }
}

fn clause(name: impl Into<String>, value: f64, target: &str, pass: bool) -> Clause {
    Clause { name: name.into(), pass: pass && !value.is_nan(), value, target: target.into() }
}

fn flag(name: impl Into<String>, pass: bool) -> Clause {
    clause(name, if pass { 1.0 } else { 0.0 }, "true", pass)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn endpoint_accuracy() -> Result<Vec<Clause>, LabError> {
    let mut out = Vec::new();
    let mut slowest = 0.0_f64;
    for (a, p) in PAIRS {
        let start = Instant::now();
        let r = run_ode(&OdeConfig::with(a, p, -1e-3))?.report;
        slowest = slowest.max(start.elapsed().as_secs_f64());
        let err = r.endpoint_error[0].max(r.endpoint_error[1]);
        out.push(clause(format!("endpoint relative error a={a} p={p}"), err, "<= 1e-6", r.completed && err <= 1e-6));
    }
    out.push(clause("slowest case seconds", slowest, "< 5", slowest < 5.0));
    Ok(out)
}

/// The exponent clause is evaluated only where `|a − p| ≥ 0.5`; closer
/// pairs have no single power law within two decades.
fn asymptotics() -> Result<Vec<Clause>, LabError> {
    let mut out = Vec::new();
    for (a, p) in PAIRS {
        let r = run_ode(&OdeConfig::with(a, p, -1e-8))?.report;
        if (a - p).abs() >= 0.5 {
            let gap = r.u2_exponent.map_or(f64::NAN, |e| (e - r.expected_u2_exponent).abs());
            out.push(clause(format!("u2 exponent gap a={a} p={p}"), gap, "<= 0.02", gap <= 0.02));
        }
        let gap = (r.u1_limit_extrapolated - r.u1_limit).abs();
        out.push(clause(format!("u1(0) limit gap a={a} p={p}"), gap, "<= 1e-8", r.completed && gap <= 1e-8));
    }
    Ok(out)
}

fn euler_rest() -> Result<Vec<Clause>, LabError> {
    let params = KasnerParams::new(1.0, 4.0 / 3.0).map_err(LabError::run)?;
    let grid = PeriodicGrid::new(64, 2.0 * PI).map_err(LabError::run)?;
    let mut worst = 0.0_f64;
    for v_star in [0.5, 1.0, 3.0] {
        for tau in [-1.0, -0.1, -1e-4] {
            worst = worst.max(rest_residual(grid, tau, &params, v_star).map_err(LabError::run)?);
        }
    }
    Ok(vec![clause("rest solution relative rhs residual", worst, "<= 1e-12", worst <= 1e-12)])
}

fn euler_stability() -> Result<Vec<Clause>, LabError> {
    let start = Instant::now();
    let out = run_stability_experiment(&ExperimentConfig::default()).map_err(LabError::run)?;
    let secs = start.elapsed().as_secs_f64();
    let r = &out.report;
    let u1 = r.fitted_exponents.u1.unwrap_or(f64::NAN);
    let u0 = r.fitted_exponents.u0_minus_limit.unwrap_or(f64::NAN);
    let ratio = r.vstar_distance / r.initial_perturbation_norm;
    Ok(vec![
        flag("completed", r.pass_flags.completed),
        clause("u1 exponent", u1, ">= 0.9", u1 >= 0.9),
        clause("u0 - u0(0) exponent", u0, "1.0 +/- 0.1", (u0 - 1.0).abs() <= 0.1),
        clause("u0 - u0(0) exponent vs |t| bound", u0, ">= 0.9", u0 >= 0.9),
        clause("V* distance / initial norm", ratio, "<= 10", ratio <= 10.0),
        clause("runtime seconds", secs, "< 120", secs < 120.0),
    ])
}

fn minkowski_decay() -> Result<Vec<Clause>, LabError> {
    let out = run_minkowski(&MinkowskiConfig::default()).map_err(LabError::run)?;
    let r = &out.report;
    Ok(vec![
        flag("completed", r.completed),
        clause("decay bound worst ratio", r.decay.worst_ratio, "<= 1", r.decay.pass),
        clause("boundary form closed-form gap", r.boundary.closed_form_gap, "<= 1e-12", r.boundary.closed_form_gap <= 1e-12),
        clause("boundary samples", r.boundary.samples as f64, ">= 200", r.boundary.samples >= 200),
        flag("boundary forms non-positive", r.boundary.pass),
        clause("restriction gap", r.restriction_gap, "<= 1e-8", r.restriction_gap <= 1e-8),
        clause("runtime seconds", r.runtime_seconds, "< 180", r.runtime_seconds < 180.0),
    ])
}

fn frozen_gap(cfg: &SchwarzschildConfig) -> Result<f64, LabError> {
    let f = frozen_coeffs(1.0, cfg.lambda, cfg.variant).map_err(LabError::run)?;
    let l = cfg.lambda;
    let b0 = Matrix4::from_diagonal(&nalgebra::Vector4::new(0.5, 2.0, 2.0, 1.0));
    let mut bc = Matrix4::zeros();
    bc[(0, 0)] = 0.5 * (l + 0.5);
    bc[(1, 1)] = 2.0 * l;
    bc[(2, 2)] = 2.0 * l;
    bc[(3, 0)] = 0.5;
    bc[(3, 3)] = l - 0.5;
    Ok((f.b0 - b0).amax().max((f.bc - bc).amax()))
}

fn schwarzschild() -> Result<Vec<Clause>, LabError> {
    let cfg = SchwarzschildConfig::default();
    let out = run_schwarzschild(&cfg).map_err(LabError::run)?;
    let r = &out.report;
    let s = &r.audit.slopes;
    let fz = frozen_gap(&cfg)?;
    let h = &r.audit.flux_halving;
    let kappa_mink = kappa_of(MinkowskiConfig::default().lambda);
    Ok(vec![
        clause("Taylor slope B0", s.b0, "2.0 +/- 0.1", (s.b0 - 2.0).abs() <= 0.1),
        clause("Taylor slope Bc", s.bc, "2.0 +/- 0.1", (s.bc - 2.0).abs() <= 0.1),
        clause("Taylor slope flux", s.flux, "2.0 +/- 0.1", (s.flux - 2.0).abs() <= 0.1),
        clause("frozen matrices at t=1 max deviation", fz, "<= 1e-14", fz <= 1e-14),
        clause("flux bound ratio m=4 / m=8", h.ratio, "2.0 +/- 10%", (h.ratio - 2.0).abs() <= 0.2),
        clause("kappa minus Minkowski kappa", (r.kappa - kappa_mink).abs(), "<= 1e-12", (r.kappa - kappa_mink).abs() <= 1e-12),
        flag("completed", r.completed),
        clause("decay bound worst ratio", r.decay.worst_ratio, "<= 1", r.decay.pass),
        clause("boundary form closed-form gap", r.audit.boundary.closed_form_gap, "<= 1e-12", r.audit.boundary.pass),
        clause("restriction gap", r.restriction_gap, "<= 1e-8", r.restriction_gap <= 1e-8),
        clause("runtime seconds", r.runtime_seconds, "< 180", r.runtime_seconds < 180.0),
    ])
}

/// Largest of the algebraic residuals, which are exact up to rounding.
pub fn algebraic_residual(r: &Residuals) -> f64 {
    [r.projection_idempotency, r.projection_symmetry, r.b0_symmetry, r.b1_symmetry, r.commutator]
        .into_iter()
        .fold(0.0, f64::max)
}

fn constant_fixture() -> Result<FuchsianSystem, LabError> {
    let c = ConstantCoefficients {
        b0: DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]),
        b1: DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, -0.5]),
        bc: DMatrix::from_diagonal(&DVector::from_vec(vec![1.5, 0.7])),
        f: DVector::from_vec(vec![0.1, -0.2]),
    };
    FuchsianSystem::new("constant", ProjectionPair::diagonal(&[true, false]), Arc::new(c), 1.0).map_err(LabError::run)
}

fn structural() -> Result<Vec<Clause>, LabError> {
    let mut out = Vec::new();
    for kind in SystemKind::ALL {
        let r = check_system(&LabConfig::default_for(kind), 1000)?;
        let res = algebraic_residual(&r.residuals);
        out.push(clause(format!("{} algebraic residuals", kind.name()), res, "<= 1e-10", res <= 1e-10));
        out.push(clause(format!("{} violations", kind.name()), r.violations.len() as f64, "0", r.violations.is_empty()));
        if gate_enforced(kind) {
            out.push(clause(format!("{} kappa-gate margin", kind.name()), r.kappa_gate.lhs - r.kappa_gate.rhs, "> 0", r.kappa_gate.pass));
        }
    }
    let sys = constant_fixture()?;
    let mut worst = 0.0_f64;
    for (t, x) in [(-0.5, 0.3), (-1e-3, 2.0), (-1e-6, 5.5)] {
        let v = DVector::from_vec(vec![0.2, -0.1]);
        let w = DVector::from_vec(vec![0.3, 0.4]);
        worst = worst.max(div_b(&sys, t, x, &v, &w).map_err(LabError::run)?.matrix.amax());
    }
    out.push(clause("div B on constant coefficients", worst, "= 0", worst == 0.0));
    Ok(out)
}

fn convergence() -> Result<Vec<Clause>, LabError> {
    let cfg = ExperimentConfig { delta: 0.02, t_floor: -0.1, ..Default::default() };
    let c = convergence_study(&cfg).map_err(LabError::run)?;
    Ok(vec![
        clause("spatial order", c.spatial_order, ">= 3.5", c.spatial_order >= 3.5),
        clause("temporal order", c.temporal_order, ">= 3.8", c.temporal_order >= 3.8),
        clause("energy identity residual", c.energy_residual, "< 1e-3", c.energy_residual < 1e-3),
    ])
}

fn time_transform() -> Result<Vec<Clause>, LabError> {
    let cfg = OdeConfig::with(1.0, 0.4, -1e-3);
    let direct = integrate_in(&cfg, None)?;
    let mapped = integrate_in(&cfg, Some(0.4))?;
    let gap = (0..2)
        .map(|c| rel(mapped.final_field.values[c], direct.final_field.values[c]))
        .fold(0.0, f64::max);
    let table = transform_case_table();
    let results: Vec<_> = table.iter().map(|(c, f)| compare_transformed_prediction(c, *f)).collect();
    let matching = results.iter().filter(|r| r.cases_match).count();
    let exp_gap = results.iter().map(|r| r.max_exponent_gap).fold(0.0, f64::max);
    Ok(vec![
        flag("both runs completed", direct.completed() && mapped.completed()),
        clause("endpoint relative gap direct vs transformed", gap, "<= 1e-5", gap <= 1e-5),
        clause("prediction cases matching", matching as f64, "20 of 20", table.len() == 20 && matching == 20),
        clause("prediction exponent gap", exp_gap, "<= 1e-12", exp_gap <= 1e-12),
    ])
}

pub fn title(id: u8) -> &'static str {
    match id {
        1 => "oracle endpoint accuracy",
        2 => "oracle asymptotics",
        3 => "Euler rest solution",
        4 => "Euler stability",
        5 => "Minkowski decay",
        6 => "Schwarzschild audit and decay",
        7 => "structural suite",
        8 => "Euler convergence",
        9 => "time transform consistency",
        _ => "unknown",
    }
}

pub fn run_criterion(id: u8) -> Result<CriterionResult, LabError> {
    let f: fn() -> Result<Vec<Clause>, LabError> = match id {
        1 => endpoint_accuracy,
        2 => asymptotics,
        3 => euler_rest,
        4 => euler_stability,
        5 => minkowski_decay,
        6 => schwarzschild,
        7 => structural,
        8 => convergence,
        9 => time_transform,
        _ => return Err(LabError::Usage(format!("no criterion {id}; criteria are 1 to 9"))),
    };
    let start = Instant::now();
    let (clauses, error) = match f() {
        Ok(c) => (c, None),
        Err(e) => (Vec::new(), Some(e.to_string())),
    };
    let pass = error.is_none() && !clauses.is_empty() && clauses.iter().all(|c| c.pass);
    Ok(CriterionResult { id, title: title(id).into(), pass, clauses, seconds: start.elapsed().as_secs_f64(), error })
}

/// Parses a list such as `1,3-5,9`.
pub fn parse_criteria(text: &str) -> Result<Vec<u8>, LabError> {
    let bad = || LabError::Usage(format!("cannot read criteria {text:?}; use e.g. 1,3-5"));
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (a, b) = match part.split_once('-') {
            Some((a, b)) => (a.trim().parse::<u8>().map_err(|_| bad())?, b.trim().parse::<u8>().map_err(|_| bad())?),
            None => {
                let a = part.parse::<u8>().map_err(|_| bad())?;
                (a, a)
            }
        };
        if a > b || !CRITERIA.contains(&a) || !CRITERIA.contains(&b) {
            return Err(bad());
        }
        out.extend(a..=b);
    }
    out.sort_unstable();
    out.dedup();
    if out.is_empty() {
        return Err(bad());
    }
    Ok(out)
}

/// Tab-separated table: one row per clause, with the criterion verdict
/// repeated on each of its rows.
pub fn to_tsv(results: &[CriterionResult]) -> String {
    let mut s = String::from("criterion\ttitle\tcriterion_pass\tclause\tclause_pass\tvalue\ttarget\tseconds\n");
    for r in results {
        let verdict = if r.pass { "PASS" } else { "FAIL" };
        if let Some(e) = &r.error {
            let _ = writeln!(s, "{}\t{}\t{verdict}\terror: {}\tFAIL\tNaN\t-\t{:.3}", r.id, r.title, e.replace('\t', " "), r.seconds);
        }
        for c in &r.clauses {
            let _ = writeln!(
                s,
                "{}\t{}\t{verdict}\t{}\t{}\t{:e}\t{}\t{:.3}",
                r.id,
                r.title,
                c.name,
                if c.pass { "PASS" } else { "FAIL" },
                c.value,
                c.target,
                r.seconds
            );
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn criteria_lists() {
        assert_eq!(parse_criteria("1,3-5, 9").unwrap(), vec![1, 3, 4, 5, 9]);
        assert_eq!(parse_criteria("2,2").unwrap(), vec![2]);
        for bad in ["", "0", "10", "5-3", "x"] {
            assert_eq!(parse_criteria(bad).unwrap_err().exit_code(), 2, "{bad}");
        }
    }

    #[test]
    fn fast_criteria_pass() {
        for id in [3, 9] {
            let r = run_criterion(id).unwrap();
            assert!(r.pass, "{}", r.line());
        }
    }

    #[test]
    fn frozen_schwarzschild_matrices() {
        assert!(frozen_gap(&SchwarzschildConfig::default()).unwrap() <= 1e-14);
    }

    #[test]
    fn tsv_has_a_row_per_clause() {
        let r = CriterionResult {
            id: 4,
            title: "x".into(),
            pass: false,
            clauses: vec![clause("a", 1.0, "<= 2", true), clause("b", 3.0, "<= 2", false)],
            seconds: 0.5,
            error: None,
        };
        let tsv = to_tsv(std::slice::from_ref(&r));
        assert_eq!(tsv.lines().count(), 3);
        assert!(tsv.lines().nth(2).unwrap().contains("\tb\tFAIL\t3e0\t<= 2\t"));
        assert!(r.line().contains("FAIL") && r.line().contains("b = 3"));
    }
}

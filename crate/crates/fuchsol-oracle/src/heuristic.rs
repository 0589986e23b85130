//! The two-component model problem `∂ₜu = (1/t)diag(0,a)u + |t|^{−(1−p)}F̃(t)`
//! and its closed-form solution.

use std::fmt::Write as _;
use std::sync::Arc;

use fuchsol_core::stats::loglog_fit;
use fuchsol_core::{Coefficients, FuchsianSystem, ProjectionPair, SingularSplit, SplitParts};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::OracleError;
use crate::quadrature::integrate;

/// Absolute tolerance of every oracle quadrature.
pub const QUAD_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrigTerm {
    pub amplitude: f64,
    pub frequency: f64,
    #[serde(default)]
    pub phase: f64,
}

/// `c + Σ A sin(ωt + φ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct TrigSeries {
    pub constant: f64,
    #[serde(default)]
    pub terms: Vec<TrigTerm>,
}

impl TrigSeries {
    pub fn constant(c: f64) -> Self {
        Self { constant: c, terms: Vec::new() }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.constant + self.terms.iter().map(|s| s.amplitude * (s.frequency * t + s.phase).sin()).sum::<f64>()
    }

    pub fn is_zero(&self) -> bool {
        self.constant == 0.0 && self.terms.iter().all(|s| s.amplitude == 0.0)
    }
}

/// The bounded part `F̃ = (F̃¹, F̃²)` of the source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Forcing {
    pub f1: TrigSeries,
    pub f2: TrigSeries,
}

impl Forcing {
    pub fn zero() -> Self {
        Self { f1: TrigSeries::default(), f2: TrigSeries::default() }
    }

    pub fn constant(c1: f64, c2: f64) -> Self {
        Self { f1: TrigSeries::constant(c1), f2: TrigSeries::constant(c2) }
    }

    pub fn eval(&self, t: f64) -> [f64; 2] {
        [self.f1.eval(t), self.f2.eval(t)]
    }
}

impl Default for Forcing {
    /// `F̃¹ = 1 + ½sin 2t`, `F̃² = 1 + 0.3cos 3t`.
    fn default() -> Self {
        Self {
            f1: TrigSeries { constant: 1.0, terms: vec![TrigTerm { amplitude: 0.5, frequency: 2.0, phase: 0.0 }] },
            f2: TrigSeries {
                constant: 1.0,
                terms: vec![TrigTerm { amplitude: 0.3, frequency: 3.0, phase: std::f64::consts::FRAC_PI_2 }],
            },
        }
    }
}

/// Model problem with data `u(−1) = (u_star, u_starstar)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeuristicProblem {
    pub a: f64,
    pub p: f64,
    #[serde(default)]
    pub forcing: Forcing,
    #[serde(default)]
    pub u_star: f64,
    #[serde(default)]
    pub u_starstar: f64,
}

impl HeuristicProblem {
    pub fn new(a: f64, p: f64, forcing: Forcing, u_star: f64, u_starstar: f64) -> Result<Self, OracleError> {
        let prob = Self { a, p, forcing, u_star, u_starstar };
        prob.validate()?;
        Ok(prob)
    }

    pub fn validate(&self) -> Result<(), OracleError> {
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(OracleError::Parameter(format!("a must be positive, got {}", self.a)));
        }
        if !(self.p > 0.0 && self.p <= 1.0) {
            return Err(OracleError::Parameter(format!("p must lie in (0, 1], got {}", self.p)));
        }
        Ok(())
    }

    pub fn initial_data(&self) -> [f64; 2] {
        [self.u_star, self.u_starstar]
    }

    /// Full source `|t|^{−(1−p)}F̃(t)`.
    pub fn source(&self, t: f64) -> [f64; 2] {
        let w = (-t).powf(self.p - 1.0);
        let f = self.forcing.eval(t);
        [w * f[0], w * f[1]]
    }
}

fn check_time(t: f64) -> Result<(), OracleError> {
    if !(-1.0..0.0).contains(&t) {
        return Err(OracleError::Domain(format!("oracle time must lie in [-1, 0), got {t}")));
    }
    Ok(())
}

/// `∫_{−1}^{t}|s|^{−1+p−b}F̃ⁱ(s)ds` through `s = −σ^{1/p}`, which turns the
/// weight into `σ^{−b/p}/p` and removes the endpoint singularity when b = 0.
fn weighted_integral(prob: &HeuristicProblem, series: &TrigSeries, b: f64, t: f64) -> Result<f64, OracleError> {
    if series.is_zero() {
        return Ok(0.0);
    }
    let p = prob.p;
    let lower = (-t).powf(p);
    let q = integrate(|s: f64| s.powf(-b / p) * series.eval(-s.powf(1.0 / p)), lower, 1.0, QUAD_TOL * p)?;
    Ok(q.value / p)
}

/// Closed-form solution `(u¹(t), u²(t))`, `t ∈ [−1, 0)`.
pub fn exact_solution(prob: &HeuristicProblem, t: f64) -> Result<(f64, f64), OracleError> {
    prob.validate()?;
    check_time(t)?;
    let u1 = prob.u_star + weighted_integral(prob, &prob.forcing.f1, 0.0, t)?;
    let i2 = weighted_integral(prob, &prob.forcing.f2, prob.a, t)?;
    let u2 = (-t).powf(prob.a) * (prob.u_starstar + i2);
    Ok((u1, u2))
}

/// `u¹(0) = u_* + ∫_{−1}^0 |s|^{−1+p}F̃¹(s)ds`.
pub fn limit_u1(prob: &HeuristicProblem) -> Result<f64, OracleError> {
    prob.validate()?;
    if prob.forcing.f1.is_zero() {
        return Ok(prob.u_star);
    }
    let p = prob.p;
    let q = integrate(|s: f64| prob.forcing.f1.eval(-s.powf(1.0 / p)), 0.0, 1.0, QUAD_TOL * p)?;
    Ok(prob.u_star + q.value / p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleRow {
    pub t: f64,
    pub u1: f64,
    pub u2: f64,
    pub u1_limit: f64,
}

pub fn oracle_table(prob: &HeuristicProblem, times: &[f64]) -> Result<Vec<OracleRow>, OracleError> {
    let limit = limit_u1(prob)?;
    times
        .iter()
        .map(|&t| {
            let (u1, u2) = exact_solution(prob, t)?;
            Ok(OracleRow { t, u1, u2, u1_limit: limit })
        })
        .collect()
}

pub fn oracle_csv(rows: &[OracleRow]) -> String {
    let mut s = String::from("t,u1,u2,u1_limit\n");
    for r in rows {
        let _ = writeln!(s, "{:e},{:e},{:e},{:e}", r.t, r.u1, r.u2, r.u1_limit);
    }
    s
}

/// `n` log-spaced times from `t_start` to `t_end` (both negative).
pub fn log_grid(t_start: f64, t_end: f64, n: usize) -> Vec<f64> {
    let (la, lb) = ((-t_start).ln(), (-t_end).ln());
    (0..n)
        .map(|i| {
            let s = if n > 1 { i as f64 / (n - 1) as f64 } else { 0.0 };
            -(la + s * (lb - la)).exp()
        })
        .collect()
}

/// `|y(t)| ≤ C|t|^e` with `C` taken from the earliest grid time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundCheck {
    pub exponent: f64,
    pub constant: f64,
    /// Largest `|y|/(C|t|^e)` over the grid.
    pub worst_ratio: f64,
    /// The estimate holds up to a factor 2 over the constant fitted at the
    /// first time; the estimates are only claimed up to a constant.
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayReport {
    pub u1_limit: f64,
    /// `None` when `u¹` is exactly constant.
    pub u1_exponent: Option<f64>,
    pub u2_exponent: Option<f64>,
    pub expected_u1: f64,
    pub expected_u2: f64,
    pub u1_bound: BoundCheck,
    pub u2_bound: BoundCheck,
}

fn bound_check(ts: &[f64], ys: &[f64], rate: impl Fn(f64) -> f64, exponent: f64) -> BoundCheck {
    let constant = ys[0].abs() / rate(ts[0]);
    let worst = ts
        .iter()
        .zip(ys)
        .map(|(&t, y)| if constant > 0.0 { y.abs() / (constant * rate(t)) } else if *y == 0.0 { 0.0 } else { f64::INFINITY })
        .fold(0.0, f64::max);
    BoundCheck { exponent, constant, worst_ratio: worst, holds: worst <= 2.0 }
}

/// Evaluates the oracle on `t_grid` (increasing towards 0), checks
/// `|u¹−u¹(0)| ≲ |t|^p` and `|u²| ≲ |t|^p + |t|^a`, and fits both power laws
/// on the grid with its first 20% dropped.
pub fn decay_check(prob: &HeuristicProblem, t_grid: &[f64]) -> Result<DecayReport, OracleError> {
    if t_grid.len() < 5 {
        return Err(OracleError::Parameter("decay check needs at least 5 grid times".into()));
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(OracleError::Parameter("decay grid must increase towards t = 0".into()));
    }
    let limit = limit_u1(prob)?;
    let mut d1 = Vec::with_capacity(t_grid.len());
    let mut u2 = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let (a, b) = exact_solution(prob, t)?;
        d1.push(a - limit);
        u2.push(b);
    }
    let (p, a) = (prob.p, prob.a);
    let skip = t_grid.len() / 5;
    let at: Vec<f64> = t_grid[skip..].iter().map(|t| -t).collect();
    let fit = |ys: &[f64]| -> Option<f64> {
        let ys: Vec<f64> = ys[skip..].iter().map(|y| y.abs()).collect();
        if ys.iter().all(|&y| y > 0.0) {
            loglog_fit(&at, &ys).map(|f| f.slope)
        } else {
            None
        }
    };
    let u1_exponent = if prob.forcing.f1.is_zero() { None } else { fit(&d1) };
    let expected_u2 = if prob.forcing.f2.is_zero() { a } else { a.min(p) };
    Ok(DecayReport {
        u1_limit: limit,
        u1_exponent,
        u2_exponent: fit(&u2),
        expected_u1: p,
        expected_u2,
        u1_bound: bound_check(t_grid, &d1, |t: f64| (-t).powf(p), p),
        u2_bound: bound_check(t_grid, &u2, |t: f64| (-t).powf(p) + (-t).powf(a), expected_u2),
    })
}

struct HeuristicCoeffs {
    prob: HeuristicProblem,
}

impl Coefficients for HeuristicCoeffs {
    fn dim(&self) -> usize {
        2
    }
    fn b0(&self, _: f64, _: f64, _: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::identity(2, 2)
    }
    fn b1(&self, _: f64, _: f64, _: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::zeros(2, 2)
    }
    fn bc(&self, _: f64, _: f64, _: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::identity(2, 2) * self.prob.a
    }
    fn f(&self, t: f64, _: f64, _: &DVector<f64>) -> DVector<f64> {
        DVector::from_row_slice(&self.prob.source(t))
    }
}

impl SingularSplit for HeuristicCoeffs {
    fn p_exponent(&self) -> f64 {
        self.prob.p
    }
    fn parts(&self, t: f64, _: f64, _: &DVector<f64>) -> SplitParts {
        let mut parts = SplitParts::zeros(2);
        parts.f_tilde = DVector::from_row_slice(&self.prob.forcing.eval(t));
        parts
    }
}

/// Radius of the ball on which the model system is posed; it is linear, so
/// any radius above the solution size works.
pub const HEURISTIC_RADIUS: f64 = 100.0;

/// The model problem as a spatially homogeneous Fuchsian system with
/// `B⁰ = I`, `B¹ = 0`, `𝓑 = aI`, `ℙ = diag(0,1)`.
pub fn as_fuchsian(prob: &HeuristicProblem) -> Result<FuchsianSystem, OracleError> {
    prob.validate()?;
    let coeffs = Arc::new(HeuristicCoeffs { prob: prob.clone() });
    let sys = FuchsianSystem::new("heuristic", ProjectionPair::diagonal(&[false, true]), coeffs.clone(), HEURISTIC_RADIUS)?
        .with_split(coeffs);
    Ok(sys)
}

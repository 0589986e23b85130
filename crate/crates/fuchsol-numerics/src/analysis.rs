//! Post-processing of run output: power-law fits, limit extrapolation and
//! the energy-estimate ledger check.

use fuchsol_core::stats::loglog_fit;
use serde::Serialize;

use crate::error::NumericsError;
use crate::field::Field;
use crate::record::RunRecord;

/// A positive time series on `t < 0`, ordered towards the singular time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecaySeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub label: String,
}

impl DecaySeries {
    pub fn new(label: impl Into<String>, times: Vec<f64>, values: Vec<f64>) -> Result<Self, NumericsError> {
        if times.len() != values.len() {
            return Err(NumericsError::Shape(format!("{} times but {} values", times.len(), values.len())));
        }
        if times.iter().any(|t| !(*t < 0.0)) {
            return Err(NumericsError::Time("series times must be negative".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(NumericsError::Time("series times must increase towards 0".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(NumericsError::NonFinite { t: f64::NAN });
        }
        Ok(Self { times, values, label: label.into() })
    }

    /// Column `select` of every row of a run record.
    pub fn from_record(record: &RunRecord, label: &str, select: impl Fn(&crate::record::RecordRow) -> f64) -> Result<Self, NumericsError> {
        Self::new(label, record.rows.iter().map(|r| r.t).collect(), record.rows.iter().map(select).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitResult {
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub samples: usize,
}

pub const MIN_FIT_SAMPLES: usize = 8;

/// Least-squares slope of `log value` against `log(−t)`.
///
/// With `window = None` the window is the last two decades of |t| present
/// in the series, and the first 20% of the samples inside it are dropped.
/// An explicit window `(t_a, t_b)` is used as given.
pub fn fit_power_law(series: &DecaySeries, window: Option<(f64, f64)>) -> Result<FitResult, NumericsError> {
    let last = *series.times.last().ok_or_else(|| NumericsError::Shape("empty series".into()))?;
    let idx: Vec<usize> = match window {
        Some((ta, tb)) => {
            if !(ta < tb) {
                return Err(NumericsError::Time(format!("fit window ({ta}, {tb}) is empty")));
            }
            (0..series.times.len()).filter(|&i| series.times[i] >= ta && series.times[i] <= tb).collect()
        }
        None => {
            let inside: Vec<usize> = (0..series.times.len()).filter(|&i| series.times[i] >= 100.0 * last).collect();
            let skip = inside.len() / 5;
            inside[skip..].to_vec()
        }
    };
    if idx.len() < MIN_FIT_SAMPLES {
        return Err(NumericsError::Shape(format!(
            "fit needs at least {MIN_FIT_SAMPLES} samples in the window, found {}",
            idx.len()
        )));
    }
    let bad: Vec<usize> = idx.iter().copied().filter(|&i| !(series.values[i] > 0.0)).collect();
    if !bad.is_empty() {
        return Err(NumericsError::Shape(format!("non-positive values in '{}' at indices {bad:?}", series.label)));
    }
    let xs: Vec<f64> = idx.iter().map(|&i| -series.times[i]).collect();
    let ys: Vec<f64> = idx.iter().map(|&i| series.values[i]).collect();
    let fit = loglog_fit(&xs, &ys).ok_or_else(|| NumericsError::Shape("degenerate fit abscissae".into()))?;
    Ok(FitResult {
        exponent: fit.slope,
        intercept: fit.intercept,
        r_squared: fit.r_squared.clamp(0.0, 1.0),
        window: (series.times[idx[0]], series.times[*idx.last().unwrap()]),
        samples: idx.len(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitEstimate {
    pub limit: Field,
    pub error_bound: f64,
    /// Rate implied by the last three snapshots (NaN if they coincide).
    pub fitted_rate: f64,
    /// Whether the fitted rate lies within 50% of the predicted one.
    pub consistent: bool,
}

fn max_diff(a: &Field, b: &Field) -> f64 {
    a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn extrapolate(a: &Field, b: &Field, rate: f64) -> Field {
    let (wa, wb) = ((-a.time).powf(rate), (-b.time).powf(rate));
    let mut out = b.clone();
    for (o, (x, y)) in out.values.iter_mut().zip(a.values.iter().zip(&b.values)) {
        *o = (y * wa - x * wb) / (wa - wb);
    }
    out.time = 0.0;
    out
}

/// Solves `(s₂^r − s₃^r)/(s₁^r − s₂^r) = q` for `r > 0` by bisection,
/// where `s₁ > s₂ > s₃` are the |t| values.
fn three_point_rate(s: [f64; 3], q: f64) -> f64 {
    let g = |r: f64| (s[1].powf(r) - s[2].powf(r)) / (s[0].powf(r) - s[1].powf(r)) - q;
    let (mut lo, mut hi) = (1e-6, 50.0);
    if g(lo).signum() == g(hi).signum() {
        return f64::NAN;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid).signum() == g(lo).signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Extrapolates `ℙ⊥u(0)` from late snapshots assuming
/// `ℙ⊥u(t) = ℙ⊥u(0) + c|t|^rate`, using the last three snapshots.
pub fn limit_extract(snapshots: &[Field], predicted_rate: f64) -> Result<LimitEstimate, NumericsError> {
    if snapshots.len() < 3 {
        return Err(NumericsError::Shape("limit extraction needs at least 3 snapshots".into()));
    }
    if !(predicted_rate > 0.0) {
        return Err(NumericsError::Shape(format!("predicted rate must be positive, got {predicted_rate}")));
    }
    let n = snapshots.len();
    let (s1, s2, s3) = (&snapshots[n - 3], &snapshots[n - 2], &snapshots[n - 1]);
    if !(s1.time < s2.time && s2.time < s3.time && s3.time < 0.0) {
        return Err(NumericsError::Time("snapshots must approach t = 0 from below".into()));
    }
    let (d1, d2) = (max_diff(s1, s2), max_diff(s2, s3));
    let scale = s3.max_abs().max(f64::MIN_POSITIVE);
    let roundoff = 64.0 * f64::EPSILON * scale;
    if d1 == 0.0 && d2 == 0.0 {
        let mut limit = s3.clone();
        limit.time = 0.0;
        return Ok(LimitEstimate { limit, error_bound: 0.0, fitted_rate: f64::NAN, consistent: true });
    }
    let fitted_rate = if d1 > 0.0 { three_point_rate([-s1.time, -s2.time, -s3.time], d2 / d1) } else { f64::NAN };
    let consistent = (fitted_rate - predicted_rate).abs() <= 0.5 * predicted_rate;
    if !consistent {
        let mut limit = s3.clone();
        limit.time = 0.0;
        return Ok(LimitEstimate { limit, error_bound: 2.0 * max_diff(s1, s3) + roundoff, fitted_rate, consistent });
    }
    let l12 = extrapolate(s1, s2, predicted_rate);
    let l23 = extrapolate(s2, s3, predicted_rate);
    Ok(LimitEstimate { error_bound: max_diff(&l12, &l23) + roundoff, limit: l23, fitted_rate, consistent })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyCheck {
    /// Q at the first row: ‖u(T₀)‖²_{H^k} + ‖F̃(T₀)‖²_{H^k}.
    pub baseline: f64,
    /// Largest Q/baseline on the calibration window.
    pub constant: f64,
    /// Largest Q/baseline over the whole run.
    pub max_ratio: f64,
    /// Rows after the calibration window with Q/baseline > 5·constant.
    pub exceedances: Vec<(f64, f64)>,
    pub pass: bool,
}

/// Calibrates `Q(t) ≤ C·Q(T₀)` on `calibration = (t_a, t_b)` and flags any
/// later row exceeding five times the calibrated constant.
pub fn energy_estimate_check(record: &RunRecord, calibration: (f64, f64)) -> EnergyCheck {
    let rows = &record.rows;
    let baseline = rows.first().map_or(0.0, |r| r.energy_q);
    let ratio = |q: f64| if baseline > 0.0 { q / baseline } else if q == 0.0 { 0.0 } else { f64::INFINITY };
    let mut constant = rows
        .iter()
        .filter(|r| r.t >= calibration.0 && r.t <= calibration.1)
        .map(|r| ratio(r.energy_q))
        .fold(0.0, f64::max);
    if constant == 0.0 && baseline > 0.0 {
        constant = 1.0;
    }
    let exceedances: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.t > calibration.1)
        .map(|r| (r.t, ratio(r.energy_q)))
        .filter(|&(_, q)| !(q <= 5.0 * constant))
        .collect();
    let max_ratio = rows.iter().map(|r| ratio(r.energy_q)).fold(0.0, f64::max);
    EnergyCheck { baseline, constant, max_ratio, pass: exceedances.is_empty(), exceedances }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PeriodicGrid;
    use crate::record::{RecordRow, RunStatus};

    fn geometric(n: usize) -> Vec<f64> {
        (0..n).map(|i| -(0.9f64).powi(i as i32)).collect()
    }

    #[test]
    fn exact_power_law() {
        let ts = geometric(80);
        let vs: Vec<f64> = ts.iter().map(|t| (-t).sqrt()).collect();
        let s = DecaySeries::new("sqrt", ts, vs).unwrap();
        let f = fit_power_law(&s, None).unwrap();
        assert!((f.exponent - 0.5).abs() < 1e-6);
        assert!(f.r_squared > 0.999_999);
    }

    #[test]
    fn dominant_term_extraction() {
        let ts = geometric(150);
        let vs: Vec<f64> = ts.iter().map(|t| (-t).sqrt() + t * t).collect();
        let f = fit_power_law(&DecaySeries::new("mix", ts, vs).unwrap(), None).unwrap();
        assert!((f.exponent - 0.5).abs() < 0.02);
    }

    #[test]
    fn rescaling_leaves_exponent() {
        let ts = geometric(60);
        let vs: Vec<f64> = ts.iter().map(|t| (-t).powf(1.3) * (1.0 + 0.1 * t)).collect();
        let a = fit_power_law(&DecaySeries::new("a", ts.clone(), vs.clone()).unwrap(), None).unwrap();
        let scaled: Vec<f64> = vs.iter().map(|v| 7.5 * v).collect();
        let b = fit_power_law(&DecaySeries::new("b", ts, scaled).unwrap(), None).unwrap();
        assert!((a.exponent - b.exponent).abs() < 1e-12);
    }

    #[test]
    fn fit_errors() {
        let ts = geometric(20);
        let mut vs = vec![1.0; 20];
        vs[18] = 0.0;
        let err = fit_power_law(&DecaySeries::new("z", ts.clone(), vs).unwrap(), Some((-1.0, -1e-9))).unwrap_err();
        assert!(err.to_string().contains("18"));
        assert!(fit_power_law(&DecaySeries::new("few", ts, vec![1.0; 20]).unwrap(), Some((-0.3, -0.2))).is_err());
        assert!(DecaySeries::new("order", vec![-0.1, -0.5], vec![1.0, 1.0]).is_err());
    }

    fn snapshots(f: impl Fn(f64, f64) -> f64) -> Vec<Field> {
        let g = PeriodicGrid::new(8, 1.0).unwrap();
        [-1e-2, -5e-3, -2.5e-3].iter().map(|&t| Field::from_fn(g, 1, t, |x| vec![f(t, x)])).collect()
    }

    #[test]
    fn constant_snapshots() {
        let e = limit_extract(&snapshots(|_, x| x), 1.0).unwrap();
        assert_eq!(e.error_bound, 0.0);
        assert_eq!(e.limit.values, snapshots(|_, x| x)[0].values);
    }

    #[test]
    fn linear_approach() {
        let e = limit_extract(&snapshots(|t, x| x.cos() - 3.0 * t), 1.0).unwrap();
        assert!(e.consistent);
        assert!((e.fitted_rate - 1.0).abs() < 1e-6);
        let exact = snapshots(|_, x| x.cos())[0].values.clone();
        let err = e.limit.values.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-10);
        assert!(e.error_bound < 1e-10);
    }

    #[test]
    fn wrong_rate_falls_back() {
        let e = limit_extract(&snapshots(|t, x| x + t * t), 1.0).unwrap();
        assert!(!e.consistent);
        assert!((e.fitted_rate - 2.0).abs() < 1e-6);
        assert!(e.error_bound >= 2.5e-3f64.powi(2));
    }

    fn record(qs: &[f64]) -> RunRecord {
        let g = PeriodicGrid::new(8, 1.0).unwrap();
        let rows = qs
            .iter()
            .enumerate()
            .map(|(i, &q)| RecordRow {
                t: -(0.9f64).powi(i as i32),
                dt: 0.0,
                norms: vec![0.0],
                p_l2: 0.0,
                p_hk1: 0.0,
                pperp_hk1: 0.0,
                p_hk_sq: 0.0,
                pu_integral: 0.0,
                ftilde_sup: 0.0,
                energy_q: q,
                identity_residual: f64::NAN,
            })
            .collect();
        RunRecord {
            k_reg: 0,
            rows,
            snapshots: vec![],
            status: RunStatus::Completed,
            steps: 0,
            min_dt_over_t: 0.0,
            max_dt_over_t: 0.0,
            final_field: Field::zeros(g, 1, -0.1),
        }
    }

    #[test]
    fn energy_check_cases() {
        assert!(energy_estimate_check(&record(&[0.0; 10]), (-1.0, -0.5)).pass);
        let steady = energy_estimate_check(&record(&[1.0, 1.1, 1.2, 1.2, 1.25, 1.3, 1.3]), (-1.0, -0.7));
        assert!(steady.pass);
        let mut q = vec![1.0; 12];
        q[10] = 50.0;
        let blown = energy_estimate_check(&record(&q), (-1.0, -0.7));
        assert!(!blown.pass);
        assert_eq!(blown.exceedances.len(), 1);
    }
}

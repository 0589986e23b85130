//! Configured decay runs on the extended Schwarzschild system.

use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use fuchsol_core::FuchsianSystem;
use fuchsol_minkowski::experiment::{decay_and_restriction, nonlinearity_from};
use fuchsol_minkowski::{
    default_wave_schedule, extended_system, initial_state, run_wave, wave_grid, DecayBound, MChoice, QSpec, WaveData,
    WaveLayout, WaveModel, WaveRunSettings, WAVE_RADIUS,
};
use fuchsol_numerics::{fit_power_law, DecaySeries, FitResult, RunRecord, StepSchedule};

use crate::audit::{audit_model, select, SchwarzschildAudit, Selection};
use crate::error::SchwarzschildError;
use crate::system::{SchwarzschildChart, SchwarzschildModel, Variant};

fn d_one() -> f64 {
    1.0
}
fn d_eta() -> f64 {
    0.9
}
fn d_sigma() -> f64 {
    0.05
}
fn d_fields() -> usize {
    1
}
fn d_delta() -> f64 {
    1e-3
}
fn d_points() -> usize {
    512
}
fn d_k() -> usize {
    2
}
fn d_floor() -> f64 {
    1e-4
}
fn d_radius() -> f64 {
    WAVE_RADIUS
}
fn d_cal() -> f64 {
    0.1
}
fn d_slack() -> f64 {
    0.05
}

/// Configuration of a Schwarzschild run. `rho0` absent means the measured
/// default; `t_floor` is in physical time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchwarzschildConfig {
    #[serde(default = "d_one")]
    pub mu: f64,
    #[serde(default = "d_one")]
    pub lambda: f64,
    #[serde(default = "d_eta")]
    pub eta: f64,
    #[serde(default = "d_sigma")]
    pub sigma_target: f64,
    #[serde(default)]
    pub m: MChoice,
    #[serde(default)]
    pub rho0: Option<f64>,
    #[serde(default)]
    pub variant: Variant,
    #[serde(rename = "N_fields", default = "d_fields")]
    pub n_fields: usize,
    #[serde(default)]
    pub q: Option<QSpec>,
    #[serde(default = "d_delta")]
    pub delta: f64,
    #[serde(default = "d_points")]
    pub n_points: usize,
    #[serde(default = "d_k")]
    pub k_reg: usize,
    #[serde(default = "d_floor")]
    pub t_floor: f64,
    #[serde(default = "d_radius")]
    pub radius: f64,
    #[serde(default = "d_cal")]
    pub calibration_time: f64,
    #[serde(default = "d_slack")]
    pub decay_slack: f64,
    #[serde(default)]
    pub data: Option<WaveData>,
    #[serde(default)]
    pub schedule: Option<StepSchedule>,
}

impl Default for SchwarzschildConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

impl SchwarzschildConfig {
    fn settings(&self) -> WaveRunSettings {
        WaveRunSettings {
            n_points: self.n_points,
            k_reg: self.k_reg,
            t_floor: self.t_floor,
            schedule: self.schedule.unwrap_or_else(default_wave_schedule),
        }
    }

    pub fn selection(&self) -> Result<Selection, SchwarzschildError> {
        let m = match self.m {
            MChoice::Fixed(m) => Some(m),
            MChoice::Auto(_) => None,
        };
        select(self.mu, self.lambda, self.eta, self.sigma_target, self.variant, m, self.rho0)
    }

    pub fn model(&self, selection: &Selection) -> Result<SchwarzschildModel, SchwarzschildError> {
        let chart = SchwarzschildChart::new(self.mu, selection.rho0, selection.m, self.lambda, self.eta, self.variant)?;
        Ok(SchwarzschildModel::new(chart))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchwarzschildReport {
    pub mu: f64,
    pub lambda: f64,
    pub kappa: f64,
    pub variant: Variant,
    pub audit: SchwarzschildAudit,
    pub decay: DecayBound,
    /// Fitted rate of `‖U‖_{H^k}` over the last two decades of the run.
    pub fitted_exponent: Option<f64>,
    pub restriction_gap: f64,
    pub constraint_initial: f64,
    pub constraint_final: f64,
    pub steps: usize,
    pub completed: bool,
    pub runtime_seconds: f64,
}

pub struct SchwarzschildOutcome {
    pub report: SchwarzschildReport,
    pub record: RunRecord,
    pub model: Arc<SchwarzschildModel>,
    pub system: FuchsianSystem,
    pub layout: WaveLayout,
}

/// Rate of `‖U‖_{H^k}` fitted over the last two decades of a run.
pub fn fitted_rate(record: &RunRecord) -> Option<FitResult> {
    let series = DecaySeries::from_record(record, "Hk", |r| r.hk()).ok()?;
    fit_power_law(&series, None).ok()
}

fn default_data(cfg: &SchwarzschildConfig, rho0: f64) -> WaveData {
    cfg.data.unwrap_or_else(|| WaveData::centered(rho0, cfg.delta))
}

pub fn run_schwarzschild(cfg: &SchwarzschildConfig) -> Result<SchwarzschildOutcome, SchwarzschildError> {
    let start = Instant::now();
    let q = nonlinearity_from(&cfg.q, cfg.n_fields)?;
    let selection = cfg.selection()?;
    let model = Arc::new(cfg.model(&selection)?);
    let audit = audit_model(&model, &selection)?;
    let layout = WaveLayout { n_fields: cfg.n_fields };
    let system = extended_system(model.clone(), q, cfg.radius)?;
    let rho0 = selection.rho0;
    let data = default_data(cfg, rho0);
    let extra = WaveData { center: 1.5 * rho0, ..WaveData::centered(rho0, cfg.delta) };
    let kappa = model.kappa();
    let run = decay_and_restriction(
        &system,
        model.as_ref(),
        layout,
        &cfg.settings(),
        data,
        extra,
        kappa - cfg.decay_slack,
        cfg.calibration_time,
    )?;
    let report = SchwarzschildReport {
        mu: cfg.mu,
        lambda: cfg.lambda,
        kappa,
        variant: cfg.variant,
        audit,
        decay: run.decay,
        fitted_exponent: fitted_rate(&run.record).map(|f| f.exponent),
        restriction_gap: run.restriction_gap,
        constraint_initial: run.constraint.0,
        constraint_final: run.constraint.1,
        steps: run.record.steps,
        completed: run.record.completed(),
        runtime_seconds: start.elapsed().as_secs_f64(),
    };
    Ok(SchwarzschildOutcome { report, record: run.record, model, system, layout })
}

/// Fitted decay rates for several masses with everything else fixed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MassSweep {
    pub masses: Vec<f64>,
    pub exponents: Vec<f64>,
    pub spread: f64,
    pub pass: bool,
}

/// Runs the configuration once per mass and compares the fitted rates;
/// `m` and `ρ₀` are selected once since the coefficients do not involve `μ`.
pub fn mass_sweep(cfg: &SchwarzschildConfig, masses: &[f64], tol: f64) -> Result<MassSweep, SchwarzschildError> {
    let selection = cfg.selection()?;
    let mut exponents = Vec::with_capacity(masses.len());
    for &mu in masses {
        let c = SchwarzschildConfig { mu, ..cfg.clone() };
        let model = Arc::new(c.model(&selection)?);
        let layout = WaveLayout { n_fields: c.n_fields };
        let system = extended_system(model.clone(), nonlinearity_from(&c.q, c.n_fields)?, c.radius)?;
        let grid = wave_grid(model.as_ref(), c.n_points)?;
        let init = initial_state(model.as_ref(), layout, grid, &[default_data(&c, selection.rho0)])?;
        let record = run_wave(&system, &init, &c.settings())?;
        exponents.push(fitted_rate(&record).map(|f| f.exponent).unwrap_or(f64::NAN));
    }
    let hi = exponents.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = exponents.iter().cloned().fold(f64::INFINITY, f64::min);
    let spread = hi - lo;
    Ok(MassSweep { masses: masses.to_vec(), exponents, spread, pass: spread <= tol })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_parsing() {
        let c: SchwarzschildConfig = serde_json::from_str(r#"{"mu": 2, "variant": "displayed", "rho0": 0.1}"#).unwrap();
        assert_eq!((c.mu, c.variant, c.rho0), (2.0, Variant::Displayed, Some(0.1)));
        assert!(serde_json::from_str::<SchwarzschildConfig>(r#"{"mass": 2}"#).is_err());
        let d = SchwarzschildConfig::default();
        assert_eq!((d.eta, d.sigma_target, d.variant), (0.9, 0.05, Variant::WaveConsistent));
    }

    #[test]
    fn fixed_choices_are_respected() {
        let cfg = SchwarzschildConfig { m: MChoice::Fixed(6), rho0: Some(0.1), ..Default::default() };
        let s = cfg.selection().unwrap();
        assert_eq!((s.m, s.rho0), (6, 0.1));
        assert!(s.taylor_constant > 0.0);
    }

    #[test]
    fn zero_data_stay_zero() {
        let cfg = SchwarzschildConfig {
            m: MChoice::Fixed(8),
            rho0: Some(0.1),
            n_points: 64,
            t_floor: 0.05,
            ..Default::default()
        };
        let sel = cfg.selection().unwrap();
        let model = Arc::new(cfg.model(&sel).unwrap());
        let layout = WaveLayout { n_fields: 1 };
        let sys = extended_system(model.clone(), nonlinearity_from(&None, 1).unwrap(), 0.1).unwrap();
        let grid = wave_grid(model.as_ref(), 64).unwrap();
        let init = initial_state(model.as_ref(), layout, grid, &[WaveData::centered(0.1, 0.0)]).unwrap();
        let rec = run_wave(&sys, &init, &cfg.settings()).unwrap();
        assert!(rec.completed());
        assert_eq!(rec.final_field.max_abs(), 0.0);
    }
}

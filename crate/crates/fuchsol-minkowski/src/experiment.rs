//! Configured decay experiments on the extended wave systems.

use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use fuchsol_core::FuchsianSystem;
use fuchsol_numerics::{RunRecord, StepSchedule};

use crate::error::WaveError;
use crate::minkowski::{boundary_audit, BoundaryAudit, MinkowskiChart, MinkowskiModel, DEFAULT_RHO0};
use crate::nonlinearity::{Nonlinearity, QSpec};
use crate::run::{
    constraint_residual, decay_bound_check, default_wave_schedule, initial_state, restriction_gap, run_wave, wave_grid,
    DecayBound, WaveData, WaveRunSettings,
};
use crate::wave::{choose_m, extended_system, flux_gradient_bound, FluxBound, WaveLayout, WaveModel, WAVE_RADIUS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AutoKeyword {
    #[serde(rename = "auto")]
    Auto,
}

/// Either a fixed `m` or `"auto"`: the smallest `m` meeting the
/// flux-gradient target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MChoice {
    Fixed(u32),
    Auto(AutoKeyword),
}

impl Default for MChoice {
    fn default() -> Self {
        MChoice::Auto(AutoKeyword::Auto)
    }
}

fn d_lambda() -> f64 {
    1.0
}
fn d_rho0() -> f64 {
    DEFAULT_RHO0
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
fn d_sigma() -> f64 {
    0.05
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

/// Configuration of a Minkowski run. `t_floor` is in physical time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinkowskiConfig {
    #[serde(default = "d_lambda")]
    pub lambda: f64,
    #[serde(default)]
    pub m: MChoice,
    #[serde(default = "d_rho0")]
    pub rho0: f64,
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
    #[serde(default = "d_sigma")]
    pub sigma_target: f64,
    #[serde(default = "d_radius")]
    pub radius: f64,
    #[serde(default = "d_cal")]
    pub calibration_time: f64,
    /// The bound checked is `t^{κ − decay_slack}`.
    #[serde(default = "d_slack")]
    pub decay_slack: f64,
    #[serde(default)]
    pub data: Option<WaveData>,
    #[serde(default)]
    pub schedule: Option<StepSchedule>,
}

impl Default for MinkowskiConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

/// `q` from the configuration; without one every field gets `q^K_KK = 1`.
pub fn nonlinearity_from(q: &Option<QSpec>, n_fields: usize) -> Result<Nonlinearity, WaveError> {
    let q = match q {
        Some(spec) => spec.build()?,
        None => Nonlinearity::constant(
            &(0..n_fields)
                .map(|k| (0..n_fields).map(|i| (0..n_fields).map(|j| if i == k && j == k { 1.0 } else { 0.0 }).collect()).collect())
                .collect::<Vec<_>>(),
        )?,
    };
    if q.n_fields() != n_fields {
        return Err(WaveError::Parameter(format!("q describes {} fields, N_fields = {n_fields}", q.n_fields())));
    }
    Ok(q)
}

/// Result of a decay run plus the restriction-independence rerun.
#[derive(Debug, Clone)]
pub struct DecayRun {
    pub record: RunRecord,
    pub decay: DecayBound,
    /// Largest difference on the dependence region against a run whose
    /// data differ only outside it.
    pub restriction_gap: f64,
    /// Constraint residual of the data and of the final state.
    pub constraint: (f64, f64),
}

/// Runs the model from `data`, checks `t^{κ − slack}` decay, then reruns
/// with `extra` added outside the dependence region and compares.
#[allow(clippy::too_many_arguments)]
pub fn decay_and_restriction(
    system: &FuchsianSystem,
    model: &dyn WaveModel,
    layout: WaveLayout,
    settings: &WaveRunSettings,
    data: WaveData,
    extra: WaveData,
    exponent: f64,
    t_cal: f64,
) -> Result<DecayRun, WaveError> {
    let grid = wave_grid(model, settings.n_points)?;
    let init = initial_state(model, layout, grid, &[data])?;
    let record = run_wave(system, &init, settings)?;
    let decay = decay_bound_check(&record, exponent, t_cal, settings.t_floor)?;
    let init2 = initial_state(model, layout, grid, &[data, extra])?;
    let other = run_wave(system, &init2, settings)?;
    let mut gap = 0.0_f64;
    for (a, b) in record.snapshots.iter().zip(&other.snapshots) {
        if a.time != b.time {
            return Err(WaveError::Parameter("restriction runs took different steps".into()));
        }
        gap = gap.max(restriction_gap(model, a, b)?);
    }
    if !other.completed() {
        gap = f64::INFINITY;
    }
    let constraint = (constraint_residual(model, layout, &init)?, constraint_residual(model, layout, &record.final_field)?);
    Ok(DecayRun { record, decay, restriction_gap: gap, constraint })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinkowskiReport {
    pub lambda: f64,
    pub kappa: f64,
    pub m: u32,
    pub rho0: f64,
    pub flux_bound: FluxBound,
    pub decay: DecayBound,
    pub boundary: BoundaryAudit,
    pub restriction_gap: f64,
    /// Discretisation error of the constraint in the data and at the end.
    pub constraint_initial: f64,
    pub constraint_final: f64,
    pub steps: usize,
    pub completed: bool,
    pub runtime_seconds: f64,
}

pub struct MinkowskiOutcome {
    pub report: MinkowskiReport,
    pub record: RunRecord,
    pub model: Arc<MinkowskiModel>,
    pub system: FuchsianSystem,
    pub layout: WaveLayout,
}

/// Builds the model, choosing `m` when asked to.
pub fn build_model(cfg: &MinkowskiConfig) -> Result<(MinkowskiModel, FluxBound), WaveError> {
    match cfg.m {
        MChoice::Fixed(m) => {
            let model = MinkowskiModel::new(MinkowskiChart::new(cfg.rho0, m, cfg.lambda)?);
            let b = flux_gradient_bound(&model);
            Ok((model, b))
        }
        MChoice::Auto(_) => {
            let (m, b) = choose_m(|m| Ok(MinkowskiModel::new(MinkowskiChart::new(cfg.rho0, m, cfg.lambda)?)), cfg.sigma_target, 1)?;
            Ok((MinkowskiModel::new(MinkowskiChart::new(cfg.rho0, m, cfg.lambda)?), b))
        }
    }
}

pub fn run_minkowski(cfg: &MinkowskiConfig) -> Result<MinkowskiOutcome, WaveError> {
    let start = Instant::now();
    let q = nonlinearity_from(&cfg.q, cfg.n_fields)?;
    let (model, flux_bound) = build_model(cfg)?;
    let model = Arc::new(model);
    let layout = WaveLayout { n_fields: cfg.n_fields };
    let system = extended_system(model.clone(), q, cfg.radius)?;
    let settings = WaveRunSettings {
        n_points: cfg.n_points,
        k_reg: cfg.k_reg,
        t_floor: cfg.t_floor,
        schedule: cfg.schedule.unwrap_or_else(default_wave_schedule),
    };
    let data = cfg.data.unwrap_or_else(|| WaveData::centered(cfg.rho0, cfg.delta));
    let extra = WaveData { center: 1.5 * cfg.rho0, ..WaveData::centered(cfg.rho0, cfg.delta) };
    let kappa = model.kappa();
    let run = decay_and_restriction(
        &system,
        model.as_ref(),
        layout,
        &settings,
        data,
        extra,
        kappa - cfg.decay_slack,
        cfg.calibration_time,
    )?;
    let boundary = boundary_audit(&model, 200, 1, 1e-12);
    let report = MinkowskiReport {
        lambda: cfg.lambda,
        kappa,
        m: model.chart.m,
        rho0: cfg.rho0,
        flux_bound,
        decay: run.decay,
        boundary,
        restriction_gap: run.restriction_gap,
        constraint_initial: run.constraint.0,
        constraint_final: run.constraint.1,
        steps: run.record.steps,
        completed: run.record.completed(),
        runtime_seconds: start.elapsed().as_secs_f64(),
    };
    Ok(MinkowskiOutcome { report, record: run.record, model, system, layout })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_parsing() {
        let c: MinkowskiConfig = serde_json::from_str(r#"{"m": "auto", "N_fields": 1}"#).unwrap();
        assert_eq!(c.m, MChoice::Auto(AutoKeyword::Auto));
        let c: MinkowskiConfig = serde_json::from_str(r#"{"m": 8}"#).unwrap();
        assert_eq!(c.m, MChoice::Fixed(8));
        assert!(serde_json::from_str::<MinkowskiConfig>(r#"{"m": "big"}"#).is_err());
        assert!(serde_json::from_str::<MinkowskiConfig>(r#"{"lamda": 1}"#).is_err());
        let d = MinkowskiConfig::default();
        assert_eq!((d.lambda, d.n_points, d.delta, d.t_floor), (1.0, 512, 1e-3, 1e-4));
    }

    #[test]
    fn default_nonlinearity() {
        let q = nonlinearity_from(&None, 2).unwrap();
        let e = q.eval(&[0.0, 0.0]);
        assert_eq!(e[1][(1, 1)], 1.0);
        assert_eq!(e[1][(0, 0)], 0.0);
        assert!(nonlinearity_from(&Some(QSpec::scalar(1.0)), 2).is_err());
    }

    #[test]
    fn auto_m_meets_the_target() {
        let cfg = MinkowskiConfig { sigma_target: 0.5, ..Default::default() };
        let (model, b) = build_model(&cfg).unwrap();
        assert!(b.sup < 0.5);
        let below = MinkowskiModel::new(MinkowskiChart::new(cfg.rho0, model.chart.m - 1, 1.0).unwrap());
        assert!(flux_gradient_bound(&below).sup >= 0.5);
    }
}

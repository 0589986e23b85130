//! Data, evolution and diagnostics for the extended wave systems. Runs use
//! the solver's time `τ = −t`; everything written out is in physical time.

use std::fmt::Write as _;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use fuchsol_core::FuchsianSystem;
use fuchsol_numerics::{derivative, evolve, Field, Monitors, PeriodicGrid, RunRecord, StepSchedule};

use crate::error::WaveError;
use crate::wave::{Slot, WaveLayout, WaveModel};

/// `exp(1 − 1/(1 − x²))` on `(−1, 1)`, zero outside; peak value 1.
pub fn bump(x: f64) -> f64 {
    if x.abs() < 1.0 {
        (1.0 - 1.0 / (1.0 - x * x)).exp()
    } else {
        0.0
    }
}

pub fn bump_prime(x: f64) -> f64 {
    if x.abs() < 1.0 {
        let d = 1.0 - x * x;
        -2.0 * x / (d * d) * bump(x)
    } else {
        0.0
    }
}

/// A bump `u = amplitude·bump((ρ − center)/width)` with `∂ₜu = velocity·u`
/// at `t = 1`. Field `I` carries the profile divided by `I + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveData {
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
    #[serde(default)]
    pub velocity: f64,
}

impl WaveData {
    /// The default profile: supported in `[0.2ρ₀, 0.8ρ₀]`.
    pub fn centered(rho0: f64, amplitude: f64) -> Self {
        Self { amplitude, center: 0.5 * rho0, width: 0.3 * rho0, velocity: 0.0 }
    }

    fn eval(&self, rho: f64) -> (f64, f64) {
        let x = (rho - self.center) / self.width;
        (self.amplitude * bump(x), self.amplitude * bump_prime(x) / self.width)
    }
}

/// Initial state at `t = 1` from `(∂ₜu, Du, u)` with `D = (ρ/m)∂_ρ`.
pub fn initial_state(model: &dyn WaveModel, layout: WaveLayout, grid: PeriodicGrid, data: &[WaveData]) -> Result<Field, WaveError> {
    let s_inv = model
        .variable_map(1.0)
        .try_inverse()
        .ok_or_else(|| WaveError::Parameter("variable map is singular at t = 1".into()))?;
    let m = model.m() as f64;
    let mut field = Field::zeros(grid, layout.dim(), -1.0);
    for j in 0..grid.n_points {
        let rho = grid.x(j);
        let (mut u, mut du) = (0.0, 0.0);
        let mut ut = 0.0;
        for d in data {
            let (a, b) = d.eval(rho);
            u += a;
            du += b;
            ut += d.velocity * a;
        }
        let reduced = s_inv * Vector3::new(ut, rho / m * du, u);
        let p = field.point_mut(j);
        for i in 0..layout.n_fields {
            let w = 1.0 / (i + 1) as f64;
            p[layout.idx(Slot::U0, i)] = w * reduced[0];
            p[layout.idx(Slot::U1, i)] = w * reduced[1];
            p[layout.idx(Slot::U4, i)] = w * reduced[2];
        }
    }
    Ok(field)
}

/// Resolution and step policy of a wave run. `t_floor` is the final physical
/// time; the schedule's own floor is overwritten.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveRunSettings {
    pub n_points: usize,
    pub k_reg: usize,
    pub t_floor: f64,
    pub schedule: StepSchedule,
}

pub fn default_wave_schedule() -> StepSchedule {
    StepSchedule { cfl: 0.5, singular_factor: 0.02, dt_max: 0.01, t_floor: -1e-4, dissipation: 0.0, stencil_order: 4 }
}

pub fn wave_grid(model: &dyn WaveModel, n_points: usize) -> Result<PeriodicGrid, WaveError> {
    let half = model.cutoff().half_period();
    Ok(PeriodicGrid::with_origin(n_points, 2.0 * half, -half)?)
}

pub fn run_wave(system: &FuchsianSystem, initial: &Field, settings: &WaveRunSettings) -> Result<RunRecord, WaveError> {
    if !(settings.t_floor > 0.0 && settings.t_floor < 1.0) {
        return Err(WaveError::Parameter(format!("t_floor must lie in (0, 1), got {}", settings.t_floor)));
    }
    let schedule = StepSchedule { t_floor: -settings.t_floor, ..settings.schedule };
    let monitors = Monitors { k_reg: settings.k_reg, log_ratio: 0.9, identity_every: 0, keep_snapshots: true };
    Ok(evolve(system, initial, &schedule, &monitors)?)
}

/// The run record as CSV with physical time in the `t` column.
pub fn physical_time_csv(record: &RunRecord) -> String {
    let mut flipped = record.clone();
    flipped.snapshots.clear();
    for r in &mut flipped.rows {
        r.t = -r.t;
    }
    flipped.to_csv()
}

/// `(∂ₜu, Du, u)` of field `I` at grid point `j`.
fn physical_vars(model: &dyn WaveModel, layout: WaveLayout, field: &Field, j: usize, i: usize) -> Vector3<f64> {
    model.variable_map(-field.time) * layout.reduced(field.point(j), i)
}

/// Rows `(t, ρ, u, ū)` with `ū = Θu` the field on the physical spacetime;
/// with several fields the last two columns repeat per field.
pub fn reconstruction_csv(model: &dyn WaveModel, layout: WaveLayout, snapshots: &[Field]) -> String {
    let mut s = String::from("t,rho");
    for i in 0..layout.n_fields {
        if layout.n_fields == 1 {
            s.push_str(",u,u_bar");
        } else {
            let _ = write!(s, ",u{},u_bar{}", i + 1, i + 1);
        }
    }
    s.push('\n');
    for f in snapshots {
        let t = -f.time;
        for j in 0..f.n_points() {
            let rho = f.grid.x(j);
            let _ = write!(s, "{t:e},{rho:e}");
            for i in 0..layout.n_fields {
                let u = physical_vars(model, layout, f, j, i)[2];
                let _ = write!(s, ",{u:e},{:e}", model.theta(t, rho) * u);
            }
            s.push('\n');
        }
    }
    s
}

/// Outcome of `‖U(t)‖_{H^k} ≤ C t^e` with `C` calibrated at `t_cal`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayBound {
    pub exponent: f64,
    pub calibration_time: f64,
    pub constant: f64,
    /// Largest `‖U(t)‖/(C t^e)` over the checked window.
    pub worst_ratio: f64,
    pub worst_time: f64,
    pub checked: usize,
    /// Smallest physical time reached.
    pub t_end: f64,
    pub pass: bool,
}

/// Checks the bound on every logged sample with `t ≤ t_cal`. The norm at
/// `t_cal` is interpolated log-linearly between the bracketing samples.
pub fn decay_bound_check(record: &RunRecord, exponent: f64, t_cal: f64, t_end: f64) -> Result<DecayBound, WaveError> {
    let pts: Vec<(f64, f64)> = record.rows.iter().map(|r| (-r.t, r.hk())).collect();
    let bracket = pts
        .windows(2)
        .find(|w| w[0].0 >= t_cal && w[1].0 <= t_cal)
        .ok_or_else(|| WaveError::Parameter(format!("run does not cross t = {t_cal}")))?;
    let ((t0, n0), (t1, n1)) = (bracket[0], bracket[1]);
    let w = if t0 == t1 { 0.0 } else { (t_cal.ln() - t0.ln()) / (t1.ln() - t0.ln()) };
    let n_cal = (n0.ln() + w * (n1.ln() - n0.ln())).exp();
    let constant = n_cal / t_cal.powf(exponent);
    let mut out = DecayBound {
        exponent,
        calibration_time: t_cal,
        constant,
        worst_ratio: 0.0,
        worst_time: t_cal,
        checked: 0,
        t_end: pts.last().map(|p| p.0).unwrap_or(1.0),
        pass: false,
    };
    for &(t, n) in pts.iter().filter(|p| p.0 < t_cal) {
        let ratio = n / (constant * t.powf(exponent));
        out.checked += 1;
        if ratio > out.worst_ratio {
            out.worst_ratio = ratio;
            out.worst_time = t;
        }
    }
    let reached = out.t_end <= t_end * (1.0 + 1e-9);
    out.pass = record.completed() && reached && out.checked > 0 && out.worst_ratio <= 1.0;
    Ok(out)
}

/// Largest pointwise difference of two states on `|ρ| ≤ R(t)`.
pub fn restriction_gap(model: &dyn WaveModel, a: &Field, b: &Field) -> Result<f64, WaveError> {
    let diff = a.axpy(-1.0, b)?;
    let r = model.dependence_radius(-a.time);
    let mut gap = 0.0_f64;
    for j in 0..diff.n_points() {
        if diff.grid.x(j).abs() <= r {
            gap = diff.point(j).iter().fold(gap, |g, x| g.max(x.abs()));
        }
    }
    Ok(gap)
}

/// Relative size of `Du − (ρ/m)∂_ρu` on `|ρ| ≤ R(t)`, the constraint that
/// ties `U₁` to the derivative of `U₄`. The evolution preserves it on the
/// region where the cutoff equals one.
pub fn constraint_residual(model: &dyn WaveModel, layout: WaveLayout, field: &Field) -> Result<f64, WaveError> {
    let t = -field.time;
    let n = field.n_points();
    let mut x = Field::zeros(field.grid, 2 * layout.n_fields, field.time);
    for j in 0..n {
        for i in 0..layout.n_fields {
            let v = physical_vars(model, layout, field, j, i);
            x.point_mut(j)[2 * i] = v[1];
            x.point_mut(j)[2 * i + 1] = v[2];
        }
    }
    let dx = derivative(&x, 4)?;
    let r = model.dependence_radius(t);
    let m = model.m() as f64;
    let (mut worst, mut scale) = (0.0_f64, 0.0_f64);
    for j in 0..n {
        let rho = field.grid.x(j);
        if rho.abs() > r {
            continue;
        }
        for i in 0..layout.n_fields {
            let du = x.point(j)[2 * i];
            worst = worst.max((du - rho / m * dx.point(j)[2 * i + 1]).abs());
            scale = scale.max(du.abs());
        }
    }
    Ok(if scale > 0.0 { worst / scale } else { worst })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_shape() {
        assert_eq!(bump(0.0), 1.0);
        assert_eq!(bump(1.0), 0.0);
        assert_eq!(bump(-1.3), 0.0);
        let h = 1e-6;
        for x in [-0.7, -0.2, 0.4, 0.9] {
            let fd = (bump(x + h) - bump(x - h)) / (2.0 * h);
            assert!((fd - bump_prime(x)).abs() < 1e-6);
        }
    }

    #[test]
    fn default_profile_support() {
        let d = WaveData::centered(0.5, 1e-3);
        assert_eq!(d.eval(0.1).0, 0.0);
        assert_eq!(d.eval(0.4).0, 0.0);
        assert!((d.eval(0.25).0 - 1e-3).abs() < 1e-18);
    }
}

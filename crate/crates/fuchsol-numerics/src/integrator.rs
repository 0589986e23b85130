//! Right-hand side assembly, RK4 stepping and the monitored evolution loop.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use fuchsol_core::{div_b, FuchsianSystem};

use crate::dissipation::kreiss_oliger;
use crate::error::NumericsError;
use crate::field::Field;
use crate::norms::{sobolev_norm, sobolev_norms_upto, sobolev_parts};
use crate::record::{RecordRow, RunRecord, RunStatus};
use crate::stencil::derivative_into;

/// Step-size policy: `dt = min(cfl·h/λ_max, c_s·|t|, dt_max)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepSchedule {
    pub cfl: f64,
    pub singular_factor: f64,
    pub dt_max: f64,
    pub t_floor: f64,
    pub dissipation: f64,
    #[serde(default = "default_stencil")]
    pub stencil_order: usize,
}

fn default_stencil() -> usize {
    4
}

impl Default for StepSchedule {
    fn default() -> Self {
        Self { cfl: 0.5, singular_factor: 0.02, dt_max: 0.01, t_floor: -1e-6, dissipation: 0.0, stencil_order: 4 }
    }
}

impl StepSchedule {
    fn validate(&self) -> Result<(), NumericsError> {
        let ok = self.cfl > 0.0
            && self.cfl <= 1.0
            && self.singular_factor > 0.0
            && self.dt_max > 0.0
            && self.t_floor < 0.0
            && self.dissipation >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(NumericsError::Time(format!("invalid step schedule {self:?}")))
        }
    }
}

/// What the evolution loop records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monitors {
    /// Sobolev index `k` of the energy norms.
    pub k_reg: usize,
    /// Log whenever |t| has shrunk by this factor since the last sample.
    pub log_ratio: f64,
    /// Evaluate the energy-identity residual at every `identity_every`-th
    /// logged sample (0 disables it).
    pub identity_every: usize,
    pub keep_snapshots: bool,
}

impl Default for Monitors {
    fn default() -> Self {
        Self { k_reg: 2, log_ratio: 0.9, identity_every: 1, keep_snapshots: false }
    }
}

fn rhs_order(system: &FuchsianSystem, field: &Field, order: usize) -> Result<Field, NumericsError> {
    let t = field.time;
    if !(t < 0.0) {
        return Err(NumericsError::Time(format!("rhs evaluated at t = {t}")));
    }
    let n = field.n_points();
    let d = field.dim;
    if d != system.fiber_dim() {
        return Err(NumericsError::Shape(format!("field has {d} components, system {}", system.fiber_dim())));
    }
    let mut du = vec![0.0; field.values.len()];
    derivative_into(&field.values, d, n, field.grid.spacing(), order, &mut du)?;
    let p = system.proj.p();
    let mut out = Field::zeros(field.grid, d, t);
    for j in 0..n {
        let x = field.grid.x(j);
        let v = field.point_vec(j);
        let norm = system.norm_h(&v);
        if !(norm < system.ball_radius) {
            return Err(NumericsError::DomainExit { t, x, index: j, norm, radius: system.ball_radius });
        }
        let w = DVector::from_column_slice(&du[j * d..(j + 1) * d]);
        let c = system.coeffs.eval(t, x, &v);
        let drive = -&c.b1 * w + &c.bc * (p * &v) / t + &c.f;
        let r = c.b0.lu().solve(&drive).ok_or(NumericsError::SingularB0 { t, x, index: j })?;
        out.point_mut(j).copy_from_slice(r.as_slice());
    }
    Ok(out)
}

/// `∂ₜu` from `B⁰u̇ = −B¹Du + (1/t)𝓑ℙu + F`, one dense solve per grid point,
/// with the fourth-order stencil.
pub fn rhs(system: &FuchsianSystem, field: &Field) -> Result<Field, NumericsError> {
    rhs_order(system, field, 4)
}

fn rk4(system: &FuchsianSystem, field: &Field, dt: f64, order: usize) -> Result<Field, NumericsError> {
    let t = field.time;
    let stage = |base: &Field, k: &Field, s: f64| -> Result<Field, NumericsError> {
        let mut f = base.axpy(s, k)?;
        f.time = t + s;
        Ok(f)
    };
    let k1 = rhs_order(system, field, order)?;
    let k2 = rhs_order(system, &stage(field, &k1, 0.5 * dt)?, order)?;
    let k3 = rhs_order(system, &stage(field, &k2, 0.5 * dt)?, order)?;
    let mut y4 = field.axpy(dt, &k3)?;
    y4.time = t + dt;
    let k4 = rhs_order(system, &y4, order)?;
    let mut out = field.clone();
    for i in 0..out.values.len() {
        out.values[i] += dt / 6.0 * (k1.values[i] + 2.0 * k2.values[i] + 2.0 * k3.values[i] + k4.values[i]);
    }
    out.time = t + dt;
    Ok(out)
}

/// One classical RK4 step followed by the optional Kreiss–Oliger filter.
pub fn step(system: &FuchsianSystem, field: &Field, dt: f64, schedule: &StepSchedule) -> Result<Field, NumericsError> {
    if !(dt > 0.0) {
        return Err(NumericsError::Time(format!("step size must be positive, got {dt}")));
    }
    if !(field.time + dt < 0.0) {
        return Err(NumericsError::Time(format!("step from {} by {dt} reaches t >= 0", field.time)));
    }
    let out = rk4(system, field, dt, schedule.stencil_order)?;
    Ok(kreiss_oliger(&out, schedule.dissipation))
}

/// Largest |eigenvalue| of `(B⁰)⁻¹B¹` over the grid (characteristic speed).
pub fn lambda_max(system: &FuchsianSystem, field: &Field) -> Result<f64, NumericsError> {
    let h = &system.inner_product;
    let mut lam = 0.0_f64;
    for j in 0..field.n_points() {
        let x = field.grid.x(j);
        let v = field.point_vec(j);
        let b0 = h * system.coeffs.b0(field.time, x, &v);
        let b1 = h * system.coeffs.b1(field.time, x, &v);
        let b0s = (&b0 + b0.transpose()) * 0.5;
        let chol = b0s.cholesky().ok_or(NumericsError::SingularB0 { t: field.time, x, index: j })?;
        let l_inv = chol.l().try_inverse().ok_or(NumericsError::SingularB0 { t: field.time, x, index: j })?;
        let m = &l_inv * ((&b1 + b1.transpose()) * 0.5) * l_inv.transpose();
        let e = m.symmetric_eigenvalues();
        lam = lam.max(e.iter().fold(0.0_f64, |a, b| a.max(b.abs())));
    }
    Ok(lam)
}

fn energy(system: &FuchsianSystem, field: &Field) -> f64 {
    let h = &system.inner_product;
    let dx = field.grid.spacing();
    (0..field.n_points())
        .map(|j| {
            let v = field.point_vec(j);
            let b0 = system.coeffs.b0(field.time, field.grid.x(j), &v);
            v.dot(&(h * b0 * &v))
        })
        .sum::<f64>()
        * dx
}

/// Energy-identity residual over one step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityResidual {
    pub absolute: f64,
    /// Absolute residual divided by the sum of magnitudes of all terms.
    pub relative: f64,
}

/// Residual of `∂ₜ⟨u,B⁰u⟩ = 2[(1/t)⟨u,𝓑ℙu⟩ + ½⟨u,Div B·u⟩ + ⟨u,F⟩]` over a
/// step: the left side is the centred difference quotient, the right side
/// is evaluated at the midpoint state and time.
pub fn energy_identity_residual(
    system: &FuchsianSystem,
    before: &Field,
    after: &Field,
    dt: f64,
) -> Result<IdentityResidual, NumericsError> {
    let lhs = (energy(system, after) - energy(system, before)) / dt;
    let mut mid = before.axpy(1.0, after)?.scaled(0.5);
    mid.time = before.time + 0.5 * dt;
    let t = mid.time;
    let n = mid.n_points();
    let d = mid.dim;
    let dx = mid.grid.spacing();
    let mut du = vec![0.0; mid.values.len()];
    derivative_into(&mid.values, d, n, dx, 4, &mut du)?;
    let h = &system.inner_product;
    let p = system.proj.p();
    let (mut sing, mut div, mut src) = (0.0, 0.0, 0.0);
    for j in 0..n {
        let x = mid.grid.x(j);
        let v = mid.point_vec(j);
        let w = DVector::from_column_slice(&du[j * d..(j + 1) * d]);
        let c = system.coeffs.eval(t, x, &v);
        let hv = h * &v;
        sing += hv.dot(&(&c.bc * (p * &v))) / t;
        src += hv.dot(&c.f);
        let db = div_b(system, t, x, &v, &w)?;
        div += hv.dot(&(&db.matrix * &v));
    }
    let (sing, div, src) = (2.0 * sing * dx, div * dx, 2.0 * src * dx);
    let absolute = (lhs - (sing + div + src)).abs();
    let scale = lhs.abs() + sing.abs() + div.abs() + src.abs();
    let relative = if scale > 0.0 { absolute / scale } else { 0.0 };
    Ok(IdentityResidual { absolute, relative })
}

fn ftilde_sq(system: &FuchsianSystem, field: &Field, k: usize) -> f64 {
    let Some(split) = &system.split else { return 0.0 };
    let zero = DVector::zeros(field.dim);
    let mut f = Field::zeros(field.grid, field.dim, field.time);
    for j in 0..field.n_points() {
        let parts = split.parts(field.time, field.grid.x(j), &zero);
        f.point_mut(j).copy_from_slice(parts.f_tilde.as_slice());
    }
    sobolev_norm(&f, k, Some(&system.inner_product)).powi(2)
}

struct Ledger {
    pu_integral: f64,
    ftilde_sup: f64,
    last_pu_rate: f64,
}

fn make_row(
    system: &FuchsianSystem,
    field: &Field,
    dt: f64,
    k: usize,
    ledger: &Ledger,
    identity: f64,
) -> RecordRow {
    let h = Some(&system.inner_product);
    let norms = sobolev_norms_upto(field, k, h);
    let pu = field.map_fibers(system.proj.p());
    let pperp = field.map_fibers(system.proj.perp());
    let p_norms = sobolev_norms_upto(&pu, k, h);
    let km1 = k.saturating_sub(1);
    let hk = norms[k];
    RecordRow {
        t: field.time,
        dt,
        p_l2: p_norms[0],
        p_hk1: p_norms[km1],
        pperp_hk1: sobolev_norm(&pperp, km1, h),
        p_hk_sq: p_norms[k] * p_norms[k],
        pu_integral: ledger.pu_integral,
        ftilde_sup: ledger.ftilde_sup,
        energy_q: hk * hk + ledger.pu_integral + ledger.ftilde_sup,
        identity_residual: identity,
        norms,
    }
}

/// Integrates from `field.time` to `schedule.t_floor`, logging norms and
/// the energy ledger at geometrically spaced times. Failures during the run
/// (non-finite values, leaving the ball, singular B⁰) end the run with an
/// `Aborted` status and the last healthy state.
pub fn evolve(
    system: &FuchsianSystem,
    initial: &Field,
    schedule: &StepSchedule,
    monitors: &Monitors,
) -> Result<RunRecord, NumericsError> {
    schedule.validate()?;
    let t0 = initial.time;
    if !(t0 < 0.0) {
        return Err(NumericsError::Time(format!("initial time must be negative, got {t0}")));
    }
    if !(schedule.t_floor > t0) {
        return Err(NumericsError::Time(format!("t_floor {} must lie after T0 {t0}", schedule.t_floor)));
    }
    if !(monitors.log_ratio > 0.0 && monitors.log_ratio < 1.0) {
        return Err(NumericsError::Time(format!("log ratio must lie in (0,1), got {}", monitors.log_ratio)));
    }
    if !initial.is_finite() {
        return Err(NumericsError::NonFinite { t: t0 });
    }
    let k = monitors.k_reg;
    let hip = Some(&system.inner_product);
    let pu_rate = |f: &Field| -> f64 {
        let pu = f.map_fibers(system.proj.p());
        -sobolev_parts(&pu, k, hip).iter().sum::<f64>() / f.time
    };

    let mut ledger = Ledger { pu_integral: 0.0, ftilde_sup: ftilde_sq(system, initial, k), last_pu_rate: 0.0 };
    ledger.last_pu_rate = pu_rate(initial);
    let mut rows = vec![make_row(system, initial, 0.0, k, &ledger, f64::NAN)];
    let mut snapshots = Vec::new();
    if monitors.keep_snapshots {
        snapshots.push(initial.clone());
    }

    let dx = initial.grid.spacing();
    let mut field = initial.clone();
    let mut next_log = t0.abs() * monitors.log_ratio;
    let mut lam = 0.0;
    let mut steps = 0usize;
    let mut logs = 0usize;
    let (mut min_ratio, mut max_ratio) = (f64::INFINITY, 0.0_f64);

    let abort = |reason: String, field: Field, rows, snapshots, steps, min_ratio, max_ratio| RunRecord {
        k_reg: k,
        rows,
        snapshots,
        status: RunStatus::Aborted { reason },
        steps,
        min_dt_over_t: min_ratio,
        max_dt_over_t: max_ratio,
        final_field: field,
    };

    while field.time < schedule.t_floor {
        let t = field.time;
        if steps.is_multiple_of(16) {
            match lambda_max(system, &field) {
                Ok(l) => lam = l,
                Err(e) => return Ok(abort(e.to_string(), field, rows, snapshots, steps, min_ratio, max_ratio)),
            }
        }
        let mut dt = (schedule.singular_factor * t.abs()).min(schedule.dt_max);
        if lam > 0.0 {
            dt = dt.min(schedule.cfl * dx / lam);
        }
        let last = t + dt >= schedule.t_floor - 1e-12 * schedule.t_floor.abs();
        if last {
            dt = schedule.t_floor - t;
        }
        let new = match step(system, &field, dt, schedule) {
            Ok(f) => f,
            Err(e) => return Ok(abort(e.to_string(), field, rows, snapshots, steps, min_ratio, max_ratio)),
        };
        if !new.is_finite() {
            let reason = format!("non-finite state after step to t = {}", new.time);
            return Ok(abort(reason, field, rows, snapshots, steps, min_ratio, max_ratio));
        }
        let mut new = new;
        if last {
            new.time = schedule.t_floor;
        }
        steps += 1;
        let ratio = dt / t.abs();
        min_ratio = min_ratio.min(ratio);
        max_ratio = max_ratio.max(ratio);

        let rate = pu_rate(&new);
        ledger.pu_integral += 0.5 * dt * (ledger.last_pu_rate + rate);
        ledger.last_pu_rate = rate;

        if new.time.abs() <= next_log || last {
            while next_log >= new.time.abs() {
                next_log *= monitors.log_ratio;
            }
            ledger.ftilde_sup = ledger.ftilde_sup.max(ftilde_sq(system, &new, k));
            logs += 1;
            let identity = if monitors.identity_every > 0 && logs.is_multiple_of(monitors.identity_every) {
                match energy_identity_residual(system, &field, &new, dt) {
                    Ok(r) => r.relative,
                    Err(e) => return Ok(abort(e.to_string(), field, rows, snapshots, steps, min_ratio, max_ratio)),
                }
            } else {
                f64::NAN
            };
            rows.push(make_row(system, &new, dt, k, &ledger, identity));
            if monitors.keep_snapshots {
                snapshots.push(new.clone());
            }
        }
        field = new;
    }

    Ok(RunRecord {
        k_reg: k,
        rows,
        snapshots,
        status: RunStatus::Completed,
        steps,
        min_dt_over_t: min_ratio,
        max_dt_over_t: max_ratio,
        final_field: field,
    })
}

//! The cylinder at spatial infinity: conformal metric, chart and the
//! conformal transformation of quadratic derivative nonlinearities.

use nalgebra::Matrix2;

use crate::error::WaveError;
use crate::nonlinearity::Nonlinearity;

/// Conformal factor, metric components in `(t, r)` and scalar curvature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConformalData {
    pub omega: f64,
    pub g_tt: f64,
    pub g_tr: f64,
    pub g_rr: f64,
    /// Coefficient of the round metric on the sphere.
    pub g_sphere: f64,
    pub r_scalar: f64,
}

fn check_tr(t: f64, r: f64) -> Result<(), WaveError> {
    if !(t > 0.0 && t < 2.0) {
        return Err(WaveError::Domain(format!("t = {t} must lie in (0, 2)")));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(WaveError::Domain(format!("r = {r} must be positive")));
    }
    Ok(())
}

/// `g = −dt² + (1−t)/r (dt dr + dr dt) + (2−t)t/r² dr² + g_S²`,
/// `Ω = 1/(r(2−t)t)`; `g` is flat, so `R = 0`.
pub fn conformal_data(t: f64, r: f64) -> Result<ConformalData, WaveError> {
    check_tr(t, r)?;
    Ok(ConformalData {
        omega: 1.0 / (r * (2.0 - t) * t),
        g_tt: -1.0,
        g_tr: (1.0 - t) / r,
        g_rr: (2.0 - t) * t / (r * r),
        g_sphere: 1.0,
        r_scalar: 0.0,
    })
}

/// Inverse of the `(t, r)` block of the metric.
pub fn inverse_metric(t: f64, r: f64) -> Matrix2<f64> {
    Matrix2::new(-(2.0 - t) * t, r * (1.0 - t), r * (1.0 - t), r * r)
}

/// `(t̄, r̄) ↦ (1 − t̄/r̄, r̄/(r̄² − t̄²))`, defined inside the spacelike cone.
pub fn chart_map(tbar: f64, rbar: f64) -> Result<(f64, f64), WaveError> {
    if !(rbar > 0.0 && rbar * rbar - tbar * tbar > 0.0) {
        return Err(WaveError::Domain(format!("({tbar}, {rbar}) is not inside the spacelike cone")));
    }
    Ok((1.0 - tbar / rbar, rbar / (rbar * rbar - tbar * tbar)))
}

pub fn chart_inverse(t: f64, r: f64) -> Result<(f64, f64), WaveError> {
    check_tr(t, r)?;
    let rbar = 1.0 / (r * t * (2.0 - t));
    Ok(((1.0 - t) * rbar, rbar))
}

/// Geometric input of the conformal source at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConformalPoint {
    pub omega: f64,
    /// Coordinate gradient of `Ω⁻¹`.
    pub grad_omega_inv: [f64; 2],
    pub g_inv: Matrix2<f64>,
}

impl ConformalPoint {
    pub fn minkowski(t: f64, r: f64) -> Result<Self, WaveError> {
        let d = conformal_data(t, r)?;
        Ok(Self {
            omega: d.omega,
            grad_omega_inv: [r * (2.0 - 2.0 * t), t * (2.0 - t)],
            g_inv: inverse_metric(t, r),
        })
    }
}

/// Source of the conformally rescaled equations in `n` spacetime
/// dimensions for `f̃ = q(ũ) g̃(∇ũ, ∇ũ)`:
///
/// ```text
/// f^K = q^K_IJ(Ω^{1−n/2}u) ( Ω^{1−n/2} g(∇u^I, ∇u^J)
///       + 2(n/2 − 1) Ω^{2−n/2} g(∇Ω⁻¹, ∇u^(I)) u^J)
///       + (1 − n/2)² Ω^{3−n/2} g(∇Ω⁻¹, ∇Ω⁻¹) u^I u^J ).
/// ```
///
/// `grad_u[I]` holds the coordinate gradient of `u^I`.
pub fn conformal_source(u: &[f64], grad_u: &[[f64; 2]], point: &ConformalPoint, q: &Nonlinearity, n: u32) -> Vec<f64> {
    let nf = u.len();
    let half = n as f64 / 2.0;
    let om = point.omega;
    let g = |a: [f64; 2], b: [f64; 2]| {
        let m = &point.g_inv;
        a[0] * (m[(0, 0)] * b[0] + m[(0, 1)] * b[1]) + a[1] * (m[(1, 0)] * b[0] + m[(1, 1)] * b[1])
    };
    let args: Vec<f64> = u.iter().map(|x| om.powf(1.0 - half) * x).collect();
    let qs = q.eval(&args);
    let w = point.grad_omega_inv;
    let gww = g(w, w);
    (0..nf)
        .map(|k| {
            let mut acc = 0.0;
            for i in 0..nf {
                for j in 0..nf {
                    let c = qs[k][(i, j)];
                    if c == 0.0 {
                        continue;
                    }
                    let cross = 0.5 * (g(w, grad_u[i]) * u[j] + g(w, grad_u[j]) * u[i]);
                    acc += c
                        * (om.powf(1.0 - half) * g(grad_u[i], grad_u[j])
                            + 2.0 * (half - 1.0) * om.powf(2.0 - half) * cross
                            + (1.0 - half).powi(2) * om.powf(3.0 - half) * gww * u[i] * u[j]);
                }
            }
            acc
        })
        .collect()
}

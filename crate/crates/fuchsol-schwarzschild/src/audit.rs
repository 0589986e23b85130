//! Quantitative checks of the extension: Taylor rates of the coefficients
//! at the cylinder, the constants that fix `m` and `ρ₀`, coercivity of
//! `𝓑̃` against `B̃⁰`, and the boundary forms of the physical region.

use nalgebra::{Matrix4, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use fuchsol_core::stats::loglog_fit;
use fuchsol_minkowski::{choose_m, flux_gradient_bound, BoundaryAudit, FluxBound, WaveError, WaveModel};

use crate::background::a_fn;
use crate::error::SchwarzschildError;
use crate::system::{first_order_coeffs, frozen_coeffs, SchwarzschildChart, SchwarzschildForm, SchwarzschildModel, Variant};

fn log_times(n: usize, lo_exp: f64) -> Vec<f64> {
    (0..n).map(|i| 10f64.powf(lo_exp * (1.0 - i as f64 / (n - 1) as f64))).collect()
}

/// `(|B⁰ − B⁰*|, |𝓑 − 𝓑*|, |tB¹ − tB¹*|)` in the max-entry norm.
fn deviation(t: f64, f: &SchwarzschildForm, frozen: &SchwarzschildForm) -> [f64; 3] {
    [(f.b0 - frozen.b0).amax(), (f.bc - frozen.bc).amax(), (f.t_b1(t) - frozen.t_b1(t)).amax()]
}

/// Sup over a log grid of `t ∈ [10⁻⁶, 1]` of the deviations at radius `r`.
fn max_deviation(r: f64, lambda: f64, variant: Variant, times: &[f64]) -> Result<[f64; 3], SchwarzschildError> {
    let mut out = [0.0_f64; 3];
    for &t in times {
        let f = first_order_coeffs(t, r, lambda, variant)?;
        let d = deviation(t, &f, &frozen_coeffs(t, lambda, variant)?);
        for (o, x) in out.iter_mut().zip(d) {
            *o = o.max(x);
        }
    }
    Ok(out)
}

/// Log–log slopes of the deviations against `ρ ∈ [10⁻³, 10⁻¹]` for `m = 2`.
///
/// For a general `m` the deviations scale like `ρ^m`; `m = 2` is the case
/// in which the quadratic Taylor bound is attained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TaylorSlopes {
    pub b0: f64,
    pub bc: f64,
    pub flux: f64,
    pub points: usize,
}

impl TaylorSlopes {
    pub fn pass(&self, target: f64, tol: f64) -> bool {
        (self.b0 - target).abs() <= tol && (self.bc - target).abs() <= tol
    }
}

pub fn taylor_slopes(lambda: f64, variant: Variant) -> Result<TaylorSlopes, SchwarzschildError> {
    let times = log_times(61, -6.0);
    let n = 21;
    let rhos: Vec<f64> = (0..n).map(|i| 10f64.powf(-3.0 + 2.0 * i as f64 / (n - 1) as f64)).collect();
    let mut devs = [vec![], vec![], vec![]];
    for &rho in &rhos {
        let d = max_deviation(rho * rho, lambda, variant, &times)?;
        for (col, x) in devs.iter_mut().zip(d) {
            col.push(x);
        }
    }
    let slope = |ys: &[f64]| loglog_fit(&rhos, ys).map(|f| f.slope).unwrap_or(f64::NAN);
    Ok(TaylorSlopes { b0: slope(&devs[0]), bc: slope(&devs[1]), flux: slope(&devs[2]), points: n })
}

/// Measured `C` with `|B − B*| ≤ Cρ²` and `|∂_ρB| ≤ C|ρ|` for
/// `B ∈ {B⁰, 𝓑, tB¹}` on `(0, 1] × (0, η)`.
pub fn taylor_constant(m: u32, lambda: f64, variant: Variant, eta: f64) -> Result<f64, SchwarzschildError> {
    let times = log_times(33, -6.0);
    let n = 200;
    let mut c = 0.0_f64;
    for j in 1..n {
        let rho = eta * j as f64 / n as f64;
        let h = 1e-6 * rho;
        let r = |x: f64| x.powi(m as i32);
        for &t in &times {
            let frozen = frozen_coeffs(t, lambda, variant)?;
            let f = first_order_coeffs(t, r(rho), lambda, variant)?;
            let fp = first_order_coeffs(t, r(rho + h), lambda, variant)?;
            let fm = first_order_coeffs(t, r(rho - h), lambda, variant)?;
            let d = deviation(t, &f, &frozen);
            let g = deviation(t, &fp, &fm);
            for x in d {
                c = c.max(x / (rho * rho));
            }
            for x in g {
                c = c.max(x / (2.0 * h * rho));
            }
        }
    }
    Ok(c)
}

/// `ρ₀ = 0.99·min{η/3, σ/(3C)}`, just inside both constraints.
pub fn default_rho0(taylor_constant: f64, eta: f64, sigma: f64) -> f64 {
    0.99 * (eta / 3.0).min(sigma / (3.0 * taylor_constant))
}

/// Sup of `|∂_ρB̃⁰|` and `|∂_ρ𝓑̃|` over the torus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GradientBounds {
    pub b0: f64,
    pub bc: f64,
}

pub fn gradient_bounds(model: &SchwarzschildModel) -> GradientBounds {
    let half = model.cutoff().half_period();
    let h = 1e-6 * model.chart.rho0;
    let mut out = GradientBounds { b0: 0.0, bc: 0.0 };
    for &t in &log_times(33, -8.0) {
        for j in 0..=600 {
            let rho = -half + 2.0 * half * j as f64 / 600.0;
            let (p, q) = (model.extended(t, rho + h), model.extended(t, rho - h));
            out.b0 = out.b0.max((p.b0 - q.b0).amax() / (2.0 * h));
            out.bc = out.bc.max((p.bc - q.bc).amax() / (2.0 * h));
        }
    }
    out
}

/// `h(V, 𝓑̃V) ≥ (κ − σ̃) h(V, B̃⁰V)` on random `(t, ρ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Coercivity {
    pub kappa: f64,
    /// Smallest eigenvalue of `(B̃⁰)^{−1/2} sym(𝓑̃) (B̃⁰)^{−1/2}`.
    pub pencil_min: f64,
    /// `max(κ − pencil_min, 0)`.
    pub sigma_tilde: f64,
    /// Smallest eigenvalue of `B̃⁰`.
    pub b0_min: f64,
    pub samples: usize,
    pub pass: bool,
}

pub fn coercivity(model: &SchwarzschildModel, samples: usize, seed: u64) -> Coercivity {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = model.cutoff().half_period();
    let (mut pencil, mut b0_min) = (f64::INFINITY, f64::INFINITY);
    for i in 0..samples {
        // Include the frozen limit t → 0 on the physical region explicitly.
        let (t, rho) = if i == 0 { (1e-10, 0.5 * model.chart.rho0) } else {
            (10f64.powf(-8.0 * rng.random::<f64>()), half * (2.0 * rng.random::<f64>() - 1.0))
        };
        let f = model.extended(t, rho);
        let w = Matrix4::from_diagonal(&f.b0.map_diagonal(|x| 1.0 / x.sqrt()));
        let p = w * (f.bc + f.bc.transpose()) * 0.5 * w;
        pencil = pencil.min(p.symmetric_eigenvalues().min());
        b0_min = b0_min.min(f.b0.symmetric_eigenvalues().min());
    }
    let kappa = model.kappa();
    Coercivity {
        kappa,
        pencil_min: pencil,
        sigma_tilde: (kappa - pencil).max(0.0),
        b0_min,
        samples,
        pass: pencil > 0.0 && b0_min >= 0.25 - 1e-12,
    }
}

/// Flux-gradient bounds at `m = 4` and `m = 8` with `ρ₀ = 0.1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FluxHalving {
    pub bound_m4: f64,
    pub bound_m8: f64,
    pub ratio: f64,
    pub pass: bool,
}

pub fn flux_halving(mu: f64, lambda: f64, variant: Variant) -> Result<FluxHalving, SchwarzschildError> {
    let bound = |m| -> Result<f64, SchwarzschildError> {
        let chart = SchwarzschildChart::new(mu, 0.1, m, lambda, 0.9, variant)?;
        Ok(flux_gradient_bound(&SchwarzschildModel::new(chart)).sup)
    };
    let (b4, b8) = (bound(4)?, bound(8)?);
    let ratio = b4 / b8;
    Ok(FluxHalving { bound_m4: b4, bound_m8: b8, ratio, pass: (ratio / 2.0 - 1.0).abs() <= 0.1 })
}

/// `h(V, n_ρΦV)` on `Γ⁺ = {ρ = ρ₀}` with `n⁺ = dρ`.
pub fn boundary_form(model: &SchwarzschildModel, t: f64, v: &[f64; 4]) -> f64 {
    let [p0, p1, p2] = model.flux(t, model.chart.rho0);
    let v = Vector4::from_column_slice(v);
    v.dot(&((p0 + p1 / t.sqrt() + p2 / t) * v))
}

/// `(ρ₀/m)[((2t−2−t²A)/(2−tA))|V₀/√(2t) + √2V₁|² − (2A/(2−tA))|V_Λ|²]`.
pub fn boundary_form_closed(chart: &SchwarzschildChart, t: f64, v: &[f64; 4]) -> f64 {
    let a = a_fn(t, chart.rho0.powi(chart.m as i32));
    let d = 2.0 - t * a;
    let w = v[0] / (2.0 * t).sqrt() + 2f64.sqrt() * v[1];
    chart.rho0 / chart.m as f64 * ((2.0 * t - 2.0 - t * t * a) / d * w * w - 2.0 * a / d * v[2] * v[2])
}

/// The form on `Γ⁻ = {ρ = 0}` with `n⁻ = −dρ`.
pub fn boundary_form_inner(model: &SchwarzschildModel, t: f64, v: &[f64; 4]) -> f64 {
    let [p0, p1, p2] = model.flux(t, 0.0);
    let v = Vector4::from_column_slice(v);
    -v.dot(&((p0 + p1 / t.sqrt() + p2 / t) * v))
}

/// Random `(t, V)` with `t ∈ [10⁻⁴, 1]` log-uniform and `V ∈ [−1, 1]⁴`.
pub fn boundary_audit(model: &SchwarzschildModel, samples: usize, seed: u64, tol: f64) -> BoundaryAudit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut gap, mut pos, mut inner) = (0.0_f64, 0.0_f64, 0.0_f64);
    for _ in 0..samples {
        let t = 10f64.powf(-4.0 * rng.random::<f64>());
        let mut v = [0.0; 4];
        for x in v.iter_mut() {
            *x = rng.random::<f64>() * 2.0 - 1.0;
        }
        let n2: f64 = v.iter().map(|x| x * x).sum();
        let form = boundary_form(model, t, &v);
        let closed = boundary_form_closed(&model.chart, t, &v);
        gap = gap.max((form - closed).abs() / closed.abs().max(1.0));
        pos = pos.max(form / n2);
        inner = inner.max(boundary_form_inner(model, t, &v).abs());
    }
    BoundaryAudit { samples, closed_form_gap: gap, max_positive: pos, inner_max: inner, pass: gap <= tol && pos <= tol && inner <= tol }
}

/// The constants that fix `m` and `ρ₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Selection {
    pub m: u32,
    pub rho0: f64,
    pub taylor_constant: f64,
    pub flux_bound: FluxBound,
}

/// Picks `m` (unless fixed) as the smallest value whose flux-gradient bound
/// is below `σ`, then `ρ₀` (unless fixed) from the measured Taylor
/// constant. The flux bound is nearly independent of `ρ₀`, so `m` is
/// chosen at `ρ₀ = 0.99η/3` and the bound is recomputed at the final `ρ₀`.
pub fn select(
    mu: f64,
    lambda: f64,
    eta: f64,
    sigma: f64,
    variant: Variant,
    m_fixed: Option<u32>,
    rho0_fixed: Option<f64>,
) -> Result<Selection, SchwarzschildError> {
    let trial_rho0 = rho0_fixed.unwrap_or(0.99 * eta / 3.0);
    let m = match m_fixed {
        Some(m) => m,
        None => {
            let build = |m| {
                SchwarzschildChart::new(mu, trial_rho0, m, lambda, eta, variant)
                    .map(SchwarzschildModel::new)
                    .map_err(|e| WaveError::Parameter(e.to_string()))
            };
            choose_m(build, sigma, 2)?.0
        }
    };
    let c = taylor_constant(m, lambda, variant, eta)?;
    let rho0 = rho0_fixed.unwrap_or_else(|| default_rho0(c, eta, sigma));
    let model = SchwarzschildModel::new(SchwarzschildChart::new(mu, rho0, m, lambda, eta, variant)?);
    Ok(Selection { m, rho0, taylor_constant: c, flux_bound: flux_gradient_bound(&model) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasuredBounds {
    pub taylor_constant: f64,
    pub flux_gradient: FluxBound,
    pub gradient: GradientBounds,
    /// Largest `|B(ρ = 10⁻⁶) − B*|` over `t`, the continuity of the extension at the cylinder.
    pub continuity: f64,
}

/// The audit document.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchwarzschildAudit {
    pub slopes: TaylorSlopes,
    pub measured_bounds: MeasuredBounds,
    pub coercivity_margin: Coercivity,
    pub chosen_m: u32,
    pub chosen_rho0: f64,
    pub flux_halving: FluxHalving,
    pub boundary: BoundaryAudit,
    pub pass: bool,
}

pub fn audit_model(model: &SchwarzschildModel, selection: &Selection) -> Result<SchwarzschildAudit, SchwarzschildError> {
    let chart = model.chart;
    let slopes = taylor_slopes(chart.lambda, chart.variant)?;
    let mut continuity = 0.0_f64;
    for &t in &log_times(33, -6.0) {
        let near = model.local(t, 1e-6)?;
        let d = deviation(t, &near, &model.frozen(t));
        continuity = continuity.max(d[0]).max(d[1]);
    }
    let measured_bounds = MeasuredBounds {
        taylor_constant: selection.taylor_constant,
        flux_gradient: selection.flux_bound,
        gradient: gradient_bounds(model),
        continuity,
    };
    let coercivity_margin = coercivity(model, 2000, 7);
    let flux_halving = flux_halving(chart.mu, chart.lambda, chart.variant)?;
    let boundary = boundary_audit(model, 200, 3, 1e-12);
    let pass = slopes.pass(2.0, 0.1) && continuity <= 1e-10 && coercivity_margin.pass && flux_halving.pass && boundary.pass;
    Ok(SchwarzschildAudit {
        slopes,
        measured_bounds,
        coercivity_margin,
        chosen_m: chart.m,
        chosen_rho0: chart.rho0,
        flux_halving,
        boundary,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(m: u32) -> SchwarzschildModel {
        SchwarzschildModel::new(SchwarzschildChart::new(1.0, 0.1, m, 1.0, 0.9, Variant::WaveConsistent).unwrap())
    }

    #[test]
    fn slopes_are_quadratic() {
        let s = taylor_slopes(1.0, Variant::WaveConsistent).unwrap();
        assert!(s.pass(2.0, 0.1), "{s:?}");
        assert!((s.flux - 2.0).abs() < 0.1, "{s:?}");
        assert!(taylor_slopes(1.0, Variant::Displayed).unwrap().pass(2.0, 0.1));
    }

    #[test]
    fn taylor_constant_shrinks_with_m() {
        let c4 = taylor_constant(4, 1.0, Variant::WaveConsistent, 0.6).unwrap();
        let c8 = taylor_constant(8, 1.0, Variant::WaveConsistent, 0.6).unwrap();
        assert!(c8 < c4 && c4.is_finite(), "{c4} {c8}");
        assert!(default_rho0(c8, 0.6, 0.05) <= 0.2);
        assert!((default_rho0(1e-12, 0.6, 0.05) - 0.99 * 0.2).abs() < 1e-15);
    }

    #[test]
    fn flux_bound_halves() {
        let h = flux_halving(1.0, 1.0, Variant::WaveConsistent).unwrap();
        assert!(h.pass, "{h:?}");
    }

    #[test]
    fn boundary_forms() {
        let a = boundary_audit(&model(4), 200, 5, 1e-12);
        assert!(a.pass, "{a:?}");
    }

    #[test]
    fn coercive_and_b0_bounded_below() {
        let c = coercivity(&model(4), 500, 2);
        assert!(c.pass, "{c:?}");
        assert!(c.pencil_min <= c.kappa + 1e-6);
        assert!((c.pencil_min - c.kappa).abs() < 0.05, "{c:?}");
    }
}

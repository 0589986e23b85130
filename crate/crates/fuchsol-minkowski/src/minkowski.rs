//! The conformal wave equations near spatial infinity of Minkowski space in
//! the first-order variables
//! `U₀ = t^{λ+1/2}∂ₜu`, `U₁ = t^λ Du`, `U_Λ = t^λ∇_Λu`, `U₄ = t^{λ−1/2}u`,
//! and the cut-off extension to the torus in `ρ = r^{1/m}`.

use nalgebra::{Matrix2, Matrix3, Matrix4, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cutoff::Cutoff;
use crate::error::WaveError;
use crate::wave::{kappa_of, quadratic_coefficients, radius_of, SourceModel, WaveModel, LAMBDA_THRESHOLD};

/// Parameters of the compactified chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinkowskiChart {
    pub rho0: f64,
    pub m: u32,
    pub lambda: f64,
}

pub const DEFAULT_RHO0: f64 = 0.5;

impl MinkowskiChart {
    pub fn new(rho0: f64, m: u32, lambda: f64) -> Result<Self, WaveError> {
        if !(rho0 > 0.0 && rho0 <= 1.0) {
            return Err(WaveError::Parameter(format!("rho0 must lie in (0, 1], got {rho0}")));
        }
        if m == 0 {
            return Err(WaveError::Parameter("m must be at least 1".into()));
        }
        check_lambda(lambda)?;
        Ok(Self { rho0, m, lambda })
    }

    pub fn kappa(&self) -> f64 {
        kappa_of(self.lambda)
    }

    /// `ρ` on the outer boundary `Γ⁺` at time `t`: `t = 2 − (ρ₀/ρ)^m`.
    pub fn gamma_plus_rho(&self, t: f64) -> f64 {
        self.rho0 * (2.0 - t).powf(-1.0 / self.m as f64)
    }
}

/// Admissible `λ ∈ ((2+√2)/4, 1]`.
pub fn check_lambda(lambda: f64) -> Result<(), WaveError> {
    if lambda > 1.0 {
        return Err(WaveError::LambdaTooLarge(lambda));
    }
    if !(lambda > LAMBDA_THRESHOLD) {
        return Err(WaveError::Parameter(format!(
            "lambda = {lambda} must exceed (2 + sqrt 2)/4 = {LAMBDA_THRESHOLD}"
        )));
    }
    Ok(())
}

fn e(a: usize, b: usize) -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    m[(a, b)] = 1.0;
    m
}

/// The linear coefficient blocks of the first-order system
/// `B⁰∂ₜU + B¹DU + B^Γ∇_ΓU = (1/t)𝓑U + F` before the extension, with
/// `F = Reg·U + t^{−1/2}Csc·U + (1/t)Bsc(U)U`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstOrderForm {
    pub b0: Matrix4<f64>,
    pub b1: Matrix4<f64>,
    pub b_gamma: Matrix4<f64>,
    pub bc: Matrix4<f64>,
    pub reg: Matrix4<f64>,
    pub csc: Matrix4<f64>,
}

pub fn first_order_coeffs(t: f64, lambda: f64) -> Result<FirstOrderForm, WaveError> {
    if lambda > 1.0 {
        return Err(WaveError::LambdaTooLarge(lambda));
    }
    if !(t > 0.0 && t <= 1.0) {
        return Err(WaveError::Domain(format!("t = {t} must lie in (0, 1]")));
    }
    let s = t.sqrt();
    Ok(FirstOrderForm {
        b0: Matrix4::from_diagonal(&nalgebra::Vector4::new(2.0 - t, 1.0, 1.0, 1.0)),
        b1: e(0, 0) * (2.0 * (t - 1.0) / t) - (e(0, 1) + e(1, 0)) / s,
        b_gamma: -(e(0, 2) + e(2, 0)) / s,
        bc: e(0, 0) * (2.0 * lambda - 1.0) + (e(1, 1) + e(2, 2)) * lambda + e(3, 0) + e(3, 3) * (lambda - 0.5),
        reg: e(0, 0) * (1.5 - lambda),
        csc: -e(0, 1),
    })
}

/// `S(t) = diag(t^{−λ−1/2}, t^{−λ}, t^{1/2−λ})`.
pub fn variable_map(t: f64, lambda: f64) -> Matrix3<f64> {
    Matrix3::from_diagonal(&nalgebra::Vector3::new(t.powf(-lambda - 0.5), t.powf(-lambda), t.powf(0.5 - lambda)))
}

/// Source geometry at `(t, r)` without the cutoff: `Θ = rt(2−t)`,
/// `ℓ = ((2−2t)/(t(2−t)), 1)` and `g⁻¹ = [[−(2−t)t, 1−t], [1−t, 1]]` in the
/// frame `(∂ₜ, D)`.
pub fn source_model(t: f64, r: f64, lambda: f64) -> SourceModel {
    let theta = r * t * (2.0 - t);
    let log_grad = Vector2::new((2.0 - 2.0 * t) / (t * (2.0 - t)), 1.0);
    let g = Matrix2::new(-(2.0 - t) * t, 1.0 - t, 1.0 - t, 1.0);
    SourceModel {
        theta,
        c: quadratic_coefficients(theta, log_grad, &g),
        row_factor: -t.powf(lambda - 0.5),
        s: variable_map(t, lambda),
    }
}

/// The extended Minkowski wave system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinkowskiModel {
    pub chart: MinkowskiChart,
    cutoff: Cutoff,
}

impl MinkowskiModel {
    pub fn new(chart: MinkowskiChart) -> Self {
        Self { chart, cutoff: Cutoff::new(chart.rho0) }
    }

    fn form(&self, t: f64) -> FirstOrderForm {
        first_order_coeffs(t.min(1.0), self.chart.lambda).expect("lambda validated by the chart")
    }
}

impl WaveModel for MinkowskiModel {
    fn name(&self) -> &str {
        "minkowski"
    }
    fn lambda(&self) -> f64 {
        self.chart.lambda
    }
    fn m(&self) -> u32 {
        self.chart.m
    }
    fn cutoff(&self) -> Cutoff {
        self.cutoff
    }
    fn b0(&self, t: f64, _: f64) -> Matrix4<f64> {
        Matrix4::from_diagonal(&nalgebra::Vector4::new(2.0 - t, 1.0, 1.0, 1.0))
    }
    fn flux(&self, _: f64, rho: f64) -> [Matrix4<f64>; 3] {
        let w = self.cutoff.chi(rho) * rho / self.chart.m as f64;
        [e(0, 0) * (2.0 * w), -(e(0, 1) + e(1, 0)) * w, e(0, 0) * (-2.0 * w)]
    }
    fn bc(&self, t: f64, _: f64) -> Matrix4<f64> {
        self.form(t).bc
    }
    fn linear_source(&self, t: f64, rho: f64) -> (Matrix4<f64>, Matrix4<f64>) {
        let chi = self.cutoff.chi(rho);
        let f = self.form(t);
        (f.reg * chi, f.csc * chi)
    }
    fn source_model(&self, t: f64, rho: f64) -> Option<SourceModel> {
        let chi = self.cutoff.chi(rho);
        if chi == 0.0 {
            return None;
        }
        let mut sm = source_model(t, radius_of(rho, self.chart.m), self.chart.lambda);
        sm.row_factor *= chi;
        Some(sm)
    }
    fn variable_map(&self, t: f64) -> Matrix3<f64> {
        variable_map(t, self.chart.lambda)
    }
    fn theta(&self, t: f64, rho: f64) -> f64 {
        radius_of(rho, self.chart.m) * t * (2.0 - t)
    }
    fn dependence_radius(&self, t: f64) -> f64 {
        self.chart.gamma_plus_rho(t)
    }
}

/// `h(V, (n₀B⁰ + n₁(χρ/m)B¹ + n_ΓB^Γ)V)` on `Γ⁺` at time `t`, with the
/// outward conormal `n⁺ = −dt + mρ₀^m/ρ^{m+1} dρ`.
pub fn boundary_form(model: &MinkowskiModel, t: f64, v: &[f64; 4]) -> f64 {
    let rho = model.chart.gamma_plus_rho(t);
    let n1 = model.chart.m as f64 * (model.chart.rho0 / rho).powi(model.chart.m as i32) / rho;
    let [p0, p1, p2] = model.flux(t, rho);
    let m = -model.b0(t, rho) + (p0 + p1 / t.sqrt() + p2 / t) * n1;
    let v = nalgebra::Vector4::from_column_slice(v);
    v.dot(&(m * v))
}

/// `−|ρ₀^mV₀/(ρ^m t^{1/2}) + V₁|² − |V_Λ|² − |V₄|²`.
pub fn boundary_form_closed(chart: &MinkowskiChart, t: f64, v: &[f64; 4]) -> f64 {
    let a = (chart.rho0 / chart.gamma_plus_rho(t)).powi(chart.m as i32);
    let w = a * v[0] / t.sqrt() + v[1];
    -w * w - v[2] * v[2] - v[3] * v[3]
}

/// The form on `Γ⁻ = {ρ = 0}` with `n⁻ = −dρ`.
pub fn boundary_form_inner(model: &MinkowskiModel, t: f64, v: &[f64; 4]) -> f64 {
    let [p0, p1, p2] = model.flux(t, 0.0);
    let m = -(p0 + p1 / t.sqrt() + p2 / t);
    let v = nalgebra::Vector4::from_column_slice(v);
    v.dot(&(m * v))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryAudit {
    pub samples: usize,
    /// Largest `|form − closed form| / max(1, |closed form|)` on `Γ⁺`.
    pub closed_form_gap: f64,
    /// Largest positive part of the form on `Γ⁺` relative to `|V|²`.
    pub max_positive: f64,
    /// Largest `|form|` on `Γ⁻`.
    pub inner_max: f64,
    pub pass: bool,
}

/// Random `(t, V)` with `t ∈ [10⁻⁴, 1]` log-uniform and unit `V`.
pub fn boundary_audit(model: &MinkowskiModel, samples: usize, seed: u64, tol: f64) -> BoundaryAudit {
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

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoercivityReport {
    pub kappa: f64,
    /// Smallest eigenvalue of `(B⁰)^{−1/2} sym(𝓑) (B⁰)^{−1/2}` over `t ∈ [10⁻⁸, 1]`.
    pub pencil_min: f64,
    pub at_t: f64,
}

pub fn coercivity_check(lambda: f64) -> Result<CoercivityReport, WaveError> {
    check_lambda(lambda)?;
    let mut best = CoercivityReport { kappa: kappa_of(lambda), pencil_min: f64::INFINITY, at_t: 1.0 };
    for i in 0..=400 {
        let t = 10f64.powf(-8.0 * i as f64 / 400.0);
        let f = first_order_coeffs(t, lambda)?;
        let d = f.b0.map_diagonal(|x| 1.0 / x.sqrt());
        let w = Matrix4::from_diagonal(&d);
        let p = w * (f.bc + f.bc.transpose()) * 0.5 * w;
        let min = p.symmetric_eigenvalues().min();
        if min < best.pencil_min {
            best.pencil_min = min;
            best.at_t = t;
        }
    }
    Ok(best)
}

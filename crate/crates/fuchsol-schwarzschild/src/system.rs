//! First-order form of the conformal wave equations near spatial infinity
//! of Schwarzschild in the variables
//! `U₀ = 2t^{λ+1/2}(∂ₜu − Du)`, `U₁ = t^λ Du`, `U_Λ = t^λ∇_Λu`,
//! `U₄ = t^{λ−1/2}u`, and the frozen-coefficient extension to the torus in
//! `ρ = r^{1/m}`.

use nalgebra::{Matrix2, Matrix3, Matrix4, Vector2, Vector4};
use serde::{Deserialize, Serialize};

use fuchsol_minkowski::minkowski::check_lambda;
use fuchsol_minkowski::wave::{quadratic_coefficients, radius_of};
use fuchsol_minkowski::{Cutoff, SourceModel, WaveModel};

use crate::background::{a_fn, script_a_fn};
use crate::error::SchwarzschildError;

/// Which `(1,1)` entry of `B⁰` (and with it of `𝓑`) to use.
///
/// `WaveConsistent` is the entry obtained by reducing the wave equation,
/// `2(2 − 2t + t²A)/(2 − tA)`. `Displayed` keeps the alternative
/// `2(2 − 2t + tA)/(2 − tA)`, whose frozen value is the constant 2; it is
/// only used to compare audits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    #[default]
    WaveConsistent,
    Displayed,
}

/// Parameters of the chart and of the extension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SchwarzschildChart {
    pub mu: f64,
    pub rho0: f64,
    pub m: u32,
    pub lambda: f64,
    pub eta: f64,
    pub variant: Variant,
}

impl SchwarzschildChart {
    pub fn new(mu: f64, rho0: f64, m: u32, lambda: f64, eta: f64, variant: Variant) -> Result<Self, SchwarzschildError> {
        let bad = |s: String| Err(SchwarzschildError::Parameter(s));
        if !(mu > 0.0 && mu.is_finite()) {
            return bad(format!("mass must be positive, got {mu}"));
        }
        if m < 2 {
            return bad(format!("m must be at least 2, got {m}"));
        }
        if !(eta > 0.0 && eta < 1.0) {
            return bad(format!("eta must lie in (0, 1), got {eta}"));
        }
        if !(rho0 > 0.0 && rho0 < 1.0 / 3.0 && 3.0 * rho0 < eta) {
            return bad(format!("rho0 = {rho0} must satisfy 0 < rho0 < 1/3 and 3 rho0 < eta = {eta}"));
        }
        check_lambda(lambda)?;
        let chart = Self { mu, rho0, m, lambda, eta, variant };
        chart.check_hyperbolic()?;
        Ok(chart)
    }

    /// Largest `r` at which the cut-off coefficients are evaluated.
    pub fn r_max(&self) -> f64 {
        radius_of(1.9 * self.rho0, self.m)
    }

    /// `2 − tA > 0` on the support of the cutoff. `tA` is increasing in `r`,
    /// so checking `r_max` on a fine `t` grid suffices.
    fn check_hyperbolic(&self) -> Result<(), SchwarzschildError> {
        let r = self.r_max();
        for i in 0..=2000 {
            let t = (i as f64 / 2000.0).max(1e-9);
            let d = 2.0 - t * a_fn(t, r);
            if !(d > 0.05) {
                return Err(SchwarzschildError::NotHyperbolic { t, r, value: d });
            }
        }
        Ok(())
    }
}

fn e(a: usize, b: usize) -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    m[(a, b)] = 1.0;
    m
}

/// Coefficients of `B⁰∂ₜU + B¹DU = (1/t)𝓑U + Reg·U + t^{−1/2}Csc·U + …`
/// at one point, with the `D`-flux split by order in `t`:
/// `B¹ = b1[0] + t^{−1/2}b1[1] + t^{−1}b1[2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchwarzschildForm {
    pub b0: Matrix4<f64>,
    pub b1: [Matrix4<f64>; 3],
    pub bc: Matrix4<f64>,
    pub reg: Matrix4<f64>,
    pub csc: Matrix4<f64>,
}

impl SchwarzschildForm {
    pub fn b1_at(&self, t: f64) -> Matrix4<f64> {
        self.b1[0] + self.b1[1] / t.sqrt() + self.b1[2] / t
    }

    /// `tB¹`, the combination that stays bounded as `t → 0`.
    pub fn t_b1(&self, t: f64) -> Matrix4<f64> {
        self.b1[0] * t + self.b1[1] * t.sqrt() + self.b1[2]
    }

    /// `frozen + χ(self − frozen)` for the principal and singular parts;
    /// the sources are multiplied by `χ`.
    pub fn blend(&self, frozen: &SchwarzschildForm, chi: f64) -> SchwarzschildForm {
        let mix = |a: &Matrix4<f64>, b: &Matrix4<f64>| b + (a - b) * chi;
        SchwarzschildForm {
            b0: mix(&self.b0, &frozen.b0),
            b1: [mix(&self.b1[0], &frozen.b1[0]), mix(&self.b1[1], &frozen.b1[1]), mix(&self.b1[2], &frozen.b1[2])],
            bc: mix(&self.bc, &frozen.bc),
            reg: self.reg * chi,
            csc: self.csc * chi,
        }
    }
}

fn check_point(t: f64, r: f64) -> Result<(), SchwarzschildError> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(SchwarzschildError::Domain(format!("t = {t} must lie in (0, 1]")));
    }
    if !(0.0..1.0).contains(&r) {
        return Err(SchwarzschildError::Domain(format!("r = {r} must lie in [0, 1)")));
    }
    Ok(())
}

/// The linear first-order coefficients at `(t, r)`.
pub fn first_order_coeffs(t: f64, r: f64, lambda: f64, variant: Variant) -> Result<SchwarzschildForm, SchwarzschildError> {
    check_point(t, r)?;
    if lambda > 1.0 {
        return Err(fuchsol_minkowski::WaveError::LambdaTooLarge(lambda).into());
    }
    let a = a_fn(t, r);
    let sa = script_a_fn(t, r, a);
    let d = 2.0 - t * a;
    if !(d > 0.0) {
        return Err(SchwarzschildError::NotHyperbolic { t, r, value: d });
    }
    let k = 2.0 - 2.0 * t + t * t * a;
    let k11 = match variant {
        Variant::WaveConsistent => k,
        Variant::Displayed => 2.0 - 2.0 * t + t * a,
    };
    let b0 = Matrix4::from_diagonal(&Vector4::new(0.5, 2.0 * k11 / d, 2.0 * a / d, 1.0));
    let b1 = [
        e(1, 1) * (-2.0 * k / d) + e(2, 2) * (-2.0 * a / d),
        (e(0, 1) + e(1, 0)) * (-k / d),
        e(0, 0) * (-k / (2.0 * d)),
    ];
    let bc = e(0, 0) * (0.5 * (lambda + 0.5) - sa / d)
        + e(1, 1) * (lambda * b0[(1, 1)])
        + e(2, 2) * (lambda * b0[(2, 2)])
        + e(3, 0) * 0.5
        + e(3, 3) * (lambda - 0.5);
    let s = r * t;
    let reg = e(0, 3) * (-4.0 * s * a / (d * (1.0 + s) * (1.0 + s)));
    let csc = e(0, 1) * (-2.0 * sa / d) + e(3, 1);
    Ok(SchwarzschildForm { b0, b1, bc, reg, csc })
}

/// The coefficients at `r = 0`, where `A = 1` and `𝓐 = 1 − t`.
pub fn frozen_coeffs(t: f64, lambda: f64, variant: Variant) -> Result<SchwarzschildForm, SchwarzschildError> {
    first_order_coeffs(t, 0.0, lambda, variant)
}

/// `S(t)` with `(∂ₜu, Du, u) = S(t)(U₀, U₁, U₄)`.
pub fn variable_map(t: f64, lambda: f64) -> Matrix3<f64> {
    let tl = t.powf(-lambda);
    Matrix3::new(0.5 * t.powf(-lambda - 0.5), tl, 0.0, 0.0, tl, 0.0, 0.0, 0.0, t.powf(0.5 - lambda))
}

/// `Θ = Ω⁻¹ = 2rt/(μ(1+rt)²)`.
pub fn theta(t: f64, r: f64, mu: f64) -> f64 {
    let s = r * t;
    2.0 * s / (mu * (1.0 + s) * (1.0 + s))
}

/// Source geometry at `(t, r)` before the cutoff: the inverse metric in
/// the frame `(∂ₜ, D)` is `[[−t(2−tA)/A, 1/A], [1/A, 0]]` and
/// `ℓ = (1−rt)/(1+rt) · (1/t, 1)`.
pub fn source_model(t: f64, r: f64, lambda: f64, mu: f64) -> Result<SourceModel, SchwarzschildError> {
    check_point(t, r)?;
    let a = a_fn(t, r);
    let d = 2.0 - t * a;
    if !(d > 0.0) {
        return Err(SchwarzschildError::NotHyperbolic { t, r, value: d });
    }
    let s = r * t;
    let ratio = (1.0 - s) / (1.0 + s);
    let g = Matrix2::new(-t * d / a, 1.0 / a, 1.0 / a, 0.0);
    let th = theta(t, r, mu);
    Ok(SourceModel {
        theta: th,
        c: quadratic_coefficients(th, Vector2::new(ratio / t, ratio), &g),
        row_factor: -t.powf(lambda - 0.5) * a / d,
        s: variable_map(t, lambda),
    })
}

/// The extended Schwarzschild wave system
/// `B̃ = B* + χ(B − B*)` with flux `(χρ/m)B̃¹` and sources `χF`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchwarzschildModel {
    pub chart: SchwarzschildChart,
    cutoff: Cutoff,
}

impl SchwarzschildModel {
    pub fn new(chart: SchwarzschildChart) -> Self {
        Self { chart, cutoff: Cutoff::new(chart.rho0) }
    }

    pub fn frozen(&self, t: f64) -> SchwarzschildForm {
        frozen_coeffs(t.min(1.0), self.chart.lambda, self.chart.variant).expect("chart validated")
    }

    /// The unextended coefficients at `(t, ρ)`.
    pub fn local(&self, t: f64, rho: f64) -> Result<SchwarzschildForm, SchwarzschildError> {
        first_order_coeffs(t.min(1.0), radius_of(rho, self.chart.m), self.chart.lambda, self.chart.variant)
    }

    /// The extended coefficients at `(t, ρ)`.
    pub fn extended(&self, t: f64, rho: f64) -> SchwarzschildForm {
        let frozen = self.frozen(t);
        let chi = self.cutoff.chi(rho);
        if chi == 0.0 {
            return frozen.blend(&frozen, 0.0);
        }
        self.local(t, rho).expect("hyperbolic on the cutoff support").blend(&frozen, chi)
    }
}

impl WaveModel for SchwarzschildModel {
    fn name(&self) -> &str {
        "schwarzschild"
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
    fn b0(&self, t: f64, rho: f64) -> Matrix4<f64> {
        self.extended(t, rho).b0
    }
    fn flux(&self, t: f64, rho: f64) -> [Matrix4<f64>; 3] {
        let w = self.cutoff.chi(rho) * rho / self.chart.m as f64;
        self.extended(t, rho).b1.map(|p| p * w)
    }
    fn bc(&self, t: f64, rho: f64) -> Matrix4<f64> {
        self.extended(t, rho).bc
    }
    fn linear_source(&self, t: f64, rho: f64) -> (Matrix4<f64>, Matrix4<f64>) {
        let f = self.extended(t, rho);
        (f.reg, f.csc)
    }
    fn source_model(&self, t: f64, rho: f64) -> Option<SourceModel> {
        let chi = self.cutoff.chi(rho);
        if chi == 0.0 {
            return None;
        }
        let t = t.min(1.0);
        let mut sm = source_model(t, radius_of(rho, self.chart.m), self.chart.lambda, self.chart.mu).ok()?;
        sm.row_factor *= chi;
        Some(sm)
    }
    fn variable_map(&self, t: f64) -> Matrix3<f64> {
        variable_map(t, self.chart.lambda)
    }
    fn theta(&self, t: f64, rho: f64) -> f64 {
        theta(t, radius_of(rho, self.chart.m), self.chart.mu)
    }
    fn dependence_radius(&self, _: f64) -> f64 {
        self.chart.rho0
    }
}

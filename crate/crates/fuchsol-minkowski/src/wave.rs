//! Machinery shared by the conformal wave systems: the first-order variables
//! `(U₀, U₁, U_Λ, U₄)`, the quadratic source written as a state-dependent
//! singular matrix, and the extended system in the solver's time `τ = −t`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Matrix2, Matrix3, Matrix4, Vector2, Vector3};
use serde::Serialize;

use fuchsol_core::{Coefficients, FuchsianSystem, PointCoeffs, ProjectionPair, SingularSplit, SplitParts};

use crate::cutoff::Cutoff;
use crate::error::WaveError;
use crate::nonlinearity::Nonlinearity;

/// Lower end of the admissible `λ` range, `(2 + √2)/4`.
pub const LAMBDA_THRESHOLD: f64 = 0.5 + std::f64::consts::SQRT_2 / 4.0;

/// Coercivity margin `κ = λ − (2 + √2)/4` of the wave systems.
pub fn kappa_of(lambda: f64) -> f64 {
    lambda - LAMBDA_THRESHOLD
}

/// Default radius of the admissible ball for the wave systems.
pub const WAVE_RADIUS: f64 = 0.1;

/// Slots of the first-order variables; the angular slot `U_Λ` is carried
/// along for spherically symmetric data and stays zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    U0 = 0,
    U1 = 1,
    ULambda = 2,
    U4 = 3,
}

/// Fiber layout: four slots of `N` fields each.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct WaveLayout {
    pub n_fields: usize,
}

impl WaveLayout {
    pub fn dim(&self) -> usize {
        4 * self.n_fields
    }

    pub fn idx(&self, slot: Slot, field: usize) -> usize {
        slot as usize * self.n_fields + field
    }

    /// `M ⊗ I_N`.
    pub fn kron(&self, m: &Matrix4<f64>) -> DMatrix<f64> {
        let n = self.n_fields;
        let mut out = DMatrix::zeros(4 * n, 4 * n);
        for a in 0..4 {
            for b in 0..4 {
                if m[(a, b)] != 0.0 {
                    for j in 0..n {
                        out[(a * n + j, b * n + j)] = m[(a, b)];
                    }
                }
            }
        }
        out
    }

    /// `(U₀, U₁, U₄)` of field `I`.
    pub fn reduced(&self, v: &[f64], field: usize) -> Vector3<f64> {
        Vector3::new(v[self.idx(Slot::U0, field)], v[self.idx(Slot::U1, field)], v[self.idx(Slot::U4, field)])
    }
}

/// The quadratic source in terms of the first-order variables.
///
/// With `X = S·(U₀, U₁, U₄) = (∂ₜu, Du, u)` and `D = r∂_r`, the conformal
/// source is `f^K = q^K_IJ(θu) c_ab X_a^I X_b^J` and enters the equation for
/// `U₀` as `row_factor · f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceModel {
    pub theta: f64,
    pub c: Matrix3<f64>,
    pub row_factor: f64,
    pub s: Matrix3<f64>,
}

/// `c` for `Θ g(∇u, ∇u) + 2g(∇Θ, ∇u)u + Θ⁻¹g(∇Θ, ∇Θ)u²`, written through
/// the logarithmic gradient `ℓ = (∂ₜ ln Θ, D ln Θ)` so that it stays finite
/// where `Θ` vanishes. `g_inv` is the inverse metric in the frame `(∂ₜ, D)`.
pub fn quadratic_coefficients(theta: f64, log_grad: Vector2<f64>, g_inv: &Matrix2<f64>) -> Matrix3<f64> {
    let gl = g_inv * log_grad;
    let mut c = Matrix3::zeros();
    c.fixed_view_mut::<2, 2>(0, 0).copy_from(g_inv);
    c[(0, 2)] = gl[0];
    c[(1, 2)] = gl[1];
    c[(2, 0)] = gl[0];
    c[(2, 1)] = gl[1];
    c[(2, 2)] = log_grad.dot(&gl);
    c * theta
}

/// The `U₀` rows of the singular nonlinear matrix, so that
/// `Bsc(U)·U = t · row_factor · f(U)`.
///
/// Cross terms are split symmetrically between the two columns they could
/// be assigned to; the product with `U` does not depend on that choice.
pub fn bsc_matrix(layout: &WaveLayout, sm: &SourceModel, q: &Nonlinearity, t: f64, v: &[f64]) -> DMatrix<f64> {
    let n = layout.n_fields;
    let mut out = DMatrix::zeros(4 * n, 4 * n);
    let xs: Vec<Vector3<f64>> = (0..n).map(|i| sm.s * layout.reduced(v, i)).collect();
    let args: Vec<f64> = xs.iter().map(|x| sm.theta * x[2]).collect();
    let qs = q.eval(&args);
    let w: Vec<Vector3<f64>> = xs.iter().map(|x| sm.s.transpose() * (sm.c * x)).collect();
    let scale = t * sm.row_factor;
    let cols = [Slot::U0, Slot::U1, Slot::U4];
    for (k, qk) in qs.iter().enumerate() {
        for j in 0..n {
            for (sigma, slot) in cols.iter().enumerate() {
                let mut acc = 0.0;
                for (i, wi) in w.iter().enumerate() {
                    acc += qk[(i, j)] * wi[sigma];
                }
                out[(layout.idx(Slot::U0, k), layout.idx(*slot, j))] = scale * acc;
            }
        }
    }
    out
}

/// A conformal wave system near a singular boundary, in physical time
/// `t ∈ (0, 1]` and the compactified radius `ρ` on `[−3ρ₀, 3ρ₀)`.
///
/// All matrices are scalar blocks of the `(U₀, U₁, U_Λ, U₄)` layout and
/// already include the cutoff. The extended system reads
///
/// ```text
/// B̃⁰∂ₜU + Φ ∂_ρU = (1/t)(𝓑̃ + Bsc(U))U + Reg·U + t^{−1/2} Csc·U
/// ```
///
/// with `Φ = P₀ + t^{−1/2}P₁ + t^{−1}P₂` the cut-off `ρ`-flux.
pub trait WaveModel: Send + Sync {
    fn name(&self) -> &str;
    fn lambda(&self) -> f64;
    fn m(&self) -> u32;
    fn cutoff(&self) -> Cutoff;
    fn b0(&self, t: f64, rho: f64) -> Matrix4<f64>;
    fn flux(&self, t: f64, rho: f64) -> [Matrix4<f64>; 3];
    fn bc(&self, t: f64, rho: f64) -> Matrix4<f64>;
    /// `(Reg, Csc)`.
    fn linear_source(&self, t: f64, rho: f64) -> (Matrix4<f64>, Matrix4<f64>);
    /// `None` where the cutoff vanishes.
    fn source_model(&self, t: f64, rho: f64) -> Option<SourceModel>;
    /// `S(t)` with `(∂ₜu, Du, u) = S(t)(U₀, U₁, U₄)`.
    fn variable_map(&self, t: f64) -> Matrix3<f64>;
    /// `Θ = Ω⁻¹`, so that the physical field is `ũ = Θu`.
    fn theta(&self, t: f64, rho: f64) -> f64;
    /// Outer edge of the region determined by the data on `(0, ρ₀)` at time `t`.
    fn dependence_radius(&self, t: f64) -> f64;
    fn kappa(&self) -> f64 {
        kappa_of(self.lambda())
    }
}

/// `r = |ρ|^m`.
pub fn radius_of(rho: f64, m: u32) -> f64 {
    rho.abs().powi(m as i32)
}

/// Coefficients of a wave model in the solver's time `τ = −t < 0`.
///
/// Writing `∂ₜ = −∂_τ` and multiplying by −1 flips the sign of the flux and
/// the regular source while the `1/t` term keeps its form. The nonlinear
/// singular part is absorbed into the state-dependent `𝓑`.
pub struct WaveCoefficients {
    model: Arc<dyn WaveModel>,
    q: Nonlinearity,
    layout: WaveLayout,
}

impl WaveCoefficients {
    pub fn new(model: Arc<dyn WaveModel>, q: Nonlinearity) -> Self {
        let layout = WaveLayout { n_fields: q.n_fields() };
        Self { model, q, layout }
    }

    pub fn layout(&self) -> WaveLayout {
        self.layout
    }

    pub fn model(&self) -> &Arc<dyn WaveModel> {
        &self.model
    }

    fn physical_t(tau: f64) -> f64 {
        -tau
    }

    fn bsc(&self, t: f64, rho: f64, v: &DVector<f64>) -> Option<DMatrix<f64>> {
        if self.q.is_zero() {
            return None;
        }
        let sm = self.model.source_model(t, rho)?;
        Some(bsc_matrix(&self.layout, &sm, &self.q, t, v.as_slice()))
    }

    fn flux_sum(&self, t: f64, rho: f64) -> Matrix4<f64> {
        let [p0, p1, p2] = self.model.flux(t, rho);
        p0 + p1 / t.sqrt() + p2 / t
    }

    fn linear_f(&self, t: f64, rho: f64) -> Matrix4<f64> {
        let (reg, csc) = self.model.linear_source(t, rho);
        reg + csc / t.sqrt()
    }
}

impl Coefficients for WaveCoefficients {
    fn dim(&self) -> usize {
        self.layout.dim()
    }

    fn b0(&self, tau: f64, rho: f64, _: &DVector<f64>) -> DMatrix<f64> {
        self.layout.kron(&self.model.b0(Self::physical_t(tau), rho))
    }

    fn b1(&self, tau: f64, rho: f64, _: &DVector<f64>) -> DMatrix<f64> {
        self.layout.kron(&(-self.flux_sum(Self::physical_t(tau), rho)))
    }

    fn bc(&self, tau: f64, rho: f64, v: &DVector<f64>) -> DMatrix<f64> {
        let t = Self::physical_t(tau);
        let base = self.layout.kron(&self.model.bc(t, rho));
        match self.bsc(t, rho, v) {
            Some(b) => base + b,
            None => base,
        }
    }

    fn f(&self, tau: f64, rho: f64, v: &DVector<f64>) -> DVector<f64> {
        self.layout.kron(&(-self.linear_f(Self::physical_t(tau), rho))) * v
    }

    fn eval(&self, tau: f64, rho: f64, v: &DVector<f64>) -> PointCoeffs {
        PointCoeffs { b0: self.b0(tau, rho, v), b1: self.b1(tau, rho, v), bc: self.bc(tau, rho, v), f: self.f(tau, rho, v) }
    }
}

impl SingularSplit for WaveCoefficients {
    fn parts(&self, tau: f64, rho: f64, v: &DVector<f64>) -> SplitParts {
        let t = Self::physical_t(tau);
        let mut parts = SplitParts::zeros(self.layout.dim());
        for (slot, p) in parts.b.iter_mut().zip(self.model.flux(t, rho)) {
            *slot = self.layout.kron(&(-p));
        }
        let (reg, csc) = self.model.linear_source(t, rho);
        parts.f0 = self.layout.kron(&(-reg)) * v;
        parts.f1 = self.layout.kron(&(-csc)) * v;
        parts
    }
}

/// The extended system on the torus `[−3ρ₀, 3ρ₀)` with `ℙ = 𝟙`.
pub fn extended_system(model: Arc<dyn WaveModel>, q: Nonlinearity, radius: f64) -> Result<FuchsianSystem, WaveError> {
    let half = model.cutoff().half_period();
    let name = model.name().to_string();
    let coeffs = Arc::new(WaveCoefficients::new(model, q));
    let n = coeffs.dim();
    Ok(FuchsianSystem::new(name, ProjectionPair::identity(n), coeffs.clone(), radius)?
        .with_split(coeffs)
        .with_domain(-half, 2.0 * half)
        .with_t_window(-1.0, -1e-6))
}

/// Sup of `|∂_ρ(tΦ)|_op` over sampled `(t, ρ)` and where it is attained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FluxBound {
    pub sup: f64,
    pub at_t: f64,
    pub at_rho: f64,
}

fn sym_op_norm(m: &Matrix4<f64>) -> f64 {
    let s = (m + m.transpose()) * 0.5;
    s.symmetric_eigenvalues().amax()
}

/// Sampled bound on the gradient of the most singular flux coefficient,
/// with `t` log-spaced on `[10⁻⁸, 1]` and 1201 points in `ρ`.
pub fn flux_gradient_bound(model: &dyn WaveModel) -> FluxBound {
    let half = model.cutoff().half_period();
    let h = 1e-6 * model.cutoff().rho0;
    let n_rho = 1201;
    let times: Vec<f64> = (0..=64).map(|i| 10f64.powf(-8.0 + 8.0 * i as f64 / 64.0)).collect();
    let scaled = |t: f64, rho: f64| {
        let [p0, p1, p2] = model.flux(t, rho);
        p0 * t + p1 * t.sqrt() + p2
    };
    let mut best = FluxBound { sup: 0.0, at_t: 1.0, at_rho: 0.0 };
    for &t in &times {
        for j in 0..n_rho {
            let rho = -half + 2.0 * half * j as f64 / (n_rho - 1) as f64;
            let d = (scaled(t, rho + h) - scaled(t, rho - h)) / (2.0 * h);
            let v = sym_op_norm(&d);
            if v > best.sup {
                best = FluxBound { sup: v, at_t: t, at_rho: rho };
            }
        }
    }
    best
}

/// Smallest `m ≥ m_min` whose model satisfies the flux-gradient bound `< σ`.
pub fn choose_m<M: WaveModel>(
    build: impl Fn(u32) -> Result<M, WaveError>,
    sigma: f64,
    m_min: u32,
) -> Result<(u32, FluxBound), WaveError> {
    if !(sigma > 0.0) {
        return Err(WaveError::Parameter(format!("sigma must be positive, got {sigma}")));
    }
    let bound = |m: u32| -> Result<FluxBound, WaveError> { Ok(flux_gradient_bound(&build(m)?)) };
    let first = bound(m_min)?;
    if first.sup < sigma {
        return Ok((m_min, first));
    }
    let mut lo = m_min;
    let mut hi = m_min.max(1) * 2;
    let mut hi_bound = bound(hi)?;
    while hi_bound.sup >= sigma {
        if hi > 1 << 16 {
            return Err(WaveError::Parameter(format!("no m below {hi} reaches sigma = {sigma}")));
        }
        lo = hi;
        hi *= 2;
        hi_bound = bound(hi)?;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let b = bound(mid)?;
        if b.sup < sigma {
            hi = mid;
            hi_bound = b;
        } else {
            lo = mid;
        }
    }
    Ok((hi, hi_bound))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_indices_and_kron() {
        let l = WaveLayout { n_fields: 2 };
        assert_eq!(l.dim(), 8);
        assert_eq!(l.idx(Slot::U4, 1), 7);
        let mut m = Matrix4::zeros();
        m[(0, 3)] = 2.0;
        let k = l.kron(&m);
        assert_eq!(k[(0, 6)], 2.0);
        assert_eq!(k[(1, 7)], 2.0);
        assert_eq!(k[(0, 7)], 0.0);
        assert_eq!(k.iter().filter(|x| **x != 0.0).count(), 2);
    }

    #[test]
    fn quadratic_coefficients_reproduce_the_three_terms() {
        let theta = 0.7;
        let l = Vector2::new(0.3, -1.2);
        let g = Matrix2::new(-0.5, 0.4, 0.4, 1.1);
        let c = quadratic_coefficients(theta, l, &g);
        let (ut, du, u) = (0.2, -0.9, 1.3);
        let x = Vector3::new(ut, du, u);
        let grad = Vector2::new(ut, du);
        let dtheta = l * theta;
        let direct = theta * grad.dot(&(g * grad)) + 2.0 * dtheta.dot(&(g * grad)) * u + dtheta.dot(&(g * dtheta)) / theta * u * u;
        assert!((x.dot(&(c * x)) - direct).abs() < 1e-14);
        assert!((c - c.transpose()).amax() == 0.0);
    }

    #[test]
    fn bsc_times_u_is_the_source() {
        let layout = WaveLayout { n_fields: 2 };
        let q = Nonlinearity::constant(&[
            vec![vec![1.0, 0.5], vec![0.5, -2.0]],
            vec![vec![0.0, 1.5], vec![1.5, 0.3]],
        ])
        .unwrap();
        let sm = SourceModel {
            theta: 0.4,
            c: Matrix3::new(1.0, 0.2, -0.3, 0.2, 2.0, 0.5, -0.3, 0.5, 0.7),
            row_factor: -1.7,
            s: Matrix3::new(2.0, 0.0, 0.0, 0.3, 1.0, 0.0, 0.0, 0.0, 0.5),
        };
        let v: Vec<f64> = vec![0.1, -0.2, 0.05, 0.3, 0.0, 0.0, -0.4, 0.25];
        let t = 0.3;
        let b = bsc_matrix(&layout, &sm, &q, t, &v);
        let bu = &b * DVector::from_vec(v.clone());
        let xs: Vec<Vector3<f64>> = (0..2).map(|i| sm.s * layout.reduced(&v, i)).collect();
        for k in 0..2 {
            let qk = &q.eval(&[0.0, 0.0])[k];
            let mut f = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    f += qk[(i, j)] * xs[i].dot(&(sm.c * xs[j]));
                }
            }
            assert!((bu[layout.idx(Slot::U0, k)] - t * sm.row_factor * f).abs() < 1e-14);
        }
        for r in 2..8 {
            assert_eq!(b.row(r).amax(), 0.0);
        }
    }

    #[test]
    fn threshold_value() {
        assert!((LAMBDA_THRESHOLD - 0.853_553_390_593_273_7).abs() < 1e-15);
        assert!((kappa_of(1.0) - 0.146_446_609_406_726_3).abs() < 1e-15);
    }
}

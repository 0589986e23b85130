//! The perturbation equations for `u = U − Û` in the time `t = −(−τ)^Γ`,
//! written as a Fuchsian system with `ℙ = diag(0, 1)`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use serde::Serialize;

use fuchsol_core::{Coefficients, FuchsianSystem, ProjectionPair, SampleSpec, SingularSplit, SplitParts};

use crate::background::Background;
use crate::error::EulerError;
use crate::params::KasnerParams;
use crate::physical::{b0_bar, b1_bar};

/// Coefficients of the transformed Euler system.
///
/// With `W = (1 + Û⁰ + v⁰, Û¹ + v¹)` the cubic homogeneity of `B̄⁰, B̄¹` and
/// the quartic homogeneity of `Ḡ` cancel every power of `t` from the change
/// of variables, leaving
///
/// ```text
/// B⁰ = B̄⁰(W),   B¹ = (τ/(Γt)) B̄¹(W),
/// G  = (γ−1)(W₀² − W₁²)(−W₁², W₀W₁)/t − (τ/(Γt)) u_*ₓ B̄¹(W)W − B⁰∂ₜÛ − B¹∂ₓÛ.
/// ```
///
/// The first term is `(Ḡ(τ,W)τ/Γ − B̄⁰(W)W)/t` in closed form, which avoids
/// cancelling O(1) quantities against each other at small |t|.
pub struct EulerCoefficients {
    params: KasnerParams,
    big_gamma: f64,
    background: Arc<dyn Background>,
}

impl EulerCoefficients {
    pub fn new(params: KasnerParams, background: Arc<dyn Background>) -> Result<Self, EulerError> {
        let big_gamma = params.require_regime()?;
        Ok(Self { params, big_gamma, background })
    }

    /// `τ/(Γt) = (−t)^{1/Γ − 1}/Γ`.
    pub fn speed_factor(&self, t: f64) -> f64 {
        (-t).powf(1.0 / self.big_gamma - 1.0) / self.big_gamma
    }

    fn w(&self, t: f64, x: f64, v: &DVector<f64>) -> (Vector2<f64>, crate::background::BackgroundPoint) {
        let bp = self.background.uhat(t, x);
        (Vector2::new(1.0 + bp.u[0] + v[0], bp.u[1] + v[1]), bp)
    }

    /// Full source `G` of the perturbation equations.
    pub fn g_full(&self, t: f64, x: f64, v: &DVector<f64>) -> Vector2<f64> {
        let gamma = self.params.gamma;
        let (w, bp) = self.w(t, x, v);
        let (a, b) = (w[0], w[1]);
        let s = self.speed_factor(t);
        let b0 = b0_bar(a, b, gamma);
        let b1 = b1_bar(a, b, gamma) * s;
        let sing = Vector2::new(-b * b, a * b) * ((gamma - 1.0) * (a * a - b * b) / t);
        sing - b1 * w * self.background.u_star_x(x) - b0 * Vector2::from(bp.dt) - b1 * Vector2::from(bp.dx)
    }

    /// `𝓑(v) = diag(1, (1+v⁰)((1+v⁰)² − (v¹)²)(γ−1))`.
    pub fn bc_matrix(&self, v: &DVector<f64>) -> Matrix2<f64> {
        let (a, b) = (1.0 + v[0], v[1]);
        Matrix2::new(1.0, 0.0, 0.0, a * (a * a - b * b) * (self.params.gamma - 1.0))
    }

    /// `F₂(v) = ((γ−1)(v¹)²((1+v⁰)² − (v¹)²), 0)`, the `|t|⁻¹` part of `F`.
    pub fn f2(&self, v: &DVector<f64>) -> Vector2<f64> {
        let (a, b) = (1.0 + v[0], v[1]);
        Vector2::new((self.params.gamma - 1.0) * b * b * (a * a - b * b), 0.0)
    }

    /// Regular remainder `F₀ = G − (1/t)𝓑ℙv + (1/t)F₂`.
    pub fn f0(&self, t: f64, x: f64, v: &DVector<f64>) -> Vector2<f64> {
        self.f_vec(t, x, v) + self.f2(v) / t
    }

    fn f_vec(&self, t: f64, x: f64, v: &DVector<f64>) -> Vector2<f64> {
        let pv = Vector2::new(0.0, v[1]);
        self.g_full(t, x, v) - self.bc_matrix(v) * pv / t
    }
}

fn dm(m: Matrix2<f64>) -> DMatrix<f64> {
    DMatrix::from_column_slice(2, 2, m.as_slice())
}

fn dv(v: Vector2<f64>) -> DVector<f64> {
    DVector::from_column_slice(v.as_slice())
}

impl Coefficients for EulerCoefficients {
    fn dim(&self) -> usize {
        2
    }
    fn b0(&self, t: f64, x: f64, v: &DVector<f64>) -> DMatrix<f64> {
        let (w, _) = self.w(t, x, v);
        dm(b0_bar(w[0], w[1], self.params.gamma))
    }
    fn b1(&self, t: f64, x: f64, v: &DVector<f64>) -> DMatrix<f64> {
        let (w, _) = self.w(t, x, v);
        dm(b1_bar(w[0], w[1], self.params.gamma) * self.speed_factor(t))
    }
    fn bc(&self, _: f64, _: f64, v: &DVector<f64>) -> DMatrix<f64> {
        dm(self.bc_matrix(v))
    }
    fn f(&self, t: f64, x: f64, v: &DVector<f64>) -> DVector<f64> {
        dv(self.f_vec(t, x, v))
    }
}

impl SingularSplit for EulerCoefficients {
    fn parts(&self, t: f64, x: f64, v: &DVector<f64>) -> SplitParts {
        let mut parts = SplitParts::zeros(2);
        parts.b[0] = self.b1(t, x, v);
        parts.f0 = dv(self.f0(t, x, v));
        parts.f2 = dv(self.f2(v));
        parts
    }
}

/// Default radius of the admissible ball `|v| < R`. The κ-gate holds with
/// measured constants up to roughly this size and fails at R = 0.1.
pub const EULER_RADIUS: f64 = 0.05;

/// The perturbation equations around `background` as a Fuchsian system on
/// the circle of length 2π.
pub fn fuchsian_form(
    background: Arc<dyn Background>,
    params: &KasnerParams,
    radius: f64,
) -> Result<FuchsianSystem, EulerError> {
    let coeffs = Arc::new(EulerCoefficients::new(*params, background)?);
    Ok(FuchsianSystem::new("euler", ProjectionPair::diagonal(&[false, true]), coeffs.clone(), radius)?
        .with_split(coeffs)
        .with_t_window(-0.5, -1e-6))
}

/// Sampled check that `F₀` stays bounded as `t → 0⁻`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct F0Audit {
    pub times: Vec<f64>,
    /// Largest |F₀| over the sampled `(x, v)` at each time.
    pub max_norms: Vec<f64>,
    pub finite: bool,
    pub regular: bool,
}

pub fn f0_regularity_audit(
    coeffs: &EulerCoefficients,
    system: &FuchsianSystem,
    samples: usize,
    seed: u64,
) -> Result<F0Audit, EulerError> {
    let spec = SampleSpec { count: samples, seed, t_window: system.t_window, radius_fraction: 0.95 };
    let pts = system.samples(&spec)?;
    let times = vec![-1e-2, -1e-4, -1e-6, -1e-8];
    let max_norms: Vec<f64> = times
        .iter()
        .map(|&t| pts.iter().map(|s| coeffs.f0(t, s.x, &s.v).amax()).fold(0.0, f64::max))
        .collect();
    let finite = max_norms.iter().all(|m| m.is_finite());
    let regular = finite && max_norms[max_norms.len() - 1] <= 10.0 * max_norms[0] + 1e-6;
    Ok(F0Audit { times, max_norms, finite, regular })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::background::RestBackground;

    fn coeffs() -> EulerCoefficients {
        EulerCoefficients::new(KasnerParams::new(1.0, 4.0 / 3.0).unwrap(), Arc::new(RestBackground::new(1.0).unwrap()))
            .unwrap()
    }

    #[test]
    fn principal_part_at_rest() {
        let c = coeffs();
        let zero = DVector::zeros(2);
        for t in [-0.5, -1e-3, -1e-9] {
            let b0 = c.b0(t, 0.0, &zero);
            assert!((b0 - DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0 / 3.0])).amax() < 1e-15);
            assert_eq!(c.f(t, 0.0, &zero).amax(), 0.0);
        }
    }

    #[test]
    fn split_recomposes_source() {
        let c = coeffs();
        let v = DVector::from_vec(vec![0.03, -0.02]);
        for t in [-0.3, -1e-4] {
            let parts = c.parts(t, 1.0, &v);
            let diff = parts.recompose_f(t, 1.0) - c.f(t, 1.0, &v);
            assert!(diff.amax() < 1e-12 * (1.0 / t.abs()));
            assert!(parts.f2[1] == 0.0);
        }
    }

    #[test]
    fn singular_part_matches_direct_difference() {
        // (γ−1)(a²−b²)(−b², ab) equals (a²−b²)(a², −ab) − B̄⁰(W)W.
        let (a, b, g) = (1.07, 0.04, 4.0 / 3.0);
        let w = Vector2::new(a, b);
        let direct = Vector2::new((a * a - b * b) * a * a, -(a * a - b * b) * a * b) - b0_bar(a, b, g) * w;
        let closed = Vector2::new(-b * b, a * b) * ((g - 1.0) * (a * a - b * b));
        assert!((direct - closed).amax() < 1e-14);
    }

    #[test]
    fn speed_factor_is_regular() {
        let c = coeffs();
        assert!((c.speed_factor(-0.5) - 3.0 * 0.25).abs() < 1e-15);
        assert!(c.speed_factor(-1e-8) < 1e-15);
    }

    #[test]
    fn f0_is_regular() {
        let c = coeffs();
        let sys = fuchsian_form(Arc::new(RestBackground::new(1.0).unwrap()), &KasnerParams::new(1.0, 4.0 / 3.0).unwrap(), 0.1)
            .unwrap();
        let audit = f0_regularity_audit(&c, &sys, 100, 4).unwrap();
        assert!(audit.regular, "{audit:?}");
    }

    #[test]
    fn out_of_regime_is_rejected() {
        let p = KasnerParams::new(3.0, 4.0 / 3.0).unwrap();
        assert!(fuchsian_form(Arc::new(RestBackground::new(1.0).unwrap()), &p, 0.1).is_err());
    }
}

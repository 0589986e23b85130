//! The Euler equations in the symmetry-reduced physical variables
//! `V = (V⁰, V¹)` and Kasner time `τ`:
//! `B̄⁰(V)∂_τV + B̄¹(V)∂ₓV = Ḡ(τ, V)`.

use nalgebra::{Matrix2, Vector2};

use fuchsol_numerics::{derivative, Field, PeriodicGrid};

use crate::error::EulerError;
use crate::params::KasnerParams;

/// `B̄⁰(v)`, cubic in `v`.
pub fn b0_bar(v0: f64, v1: f64, gamma: f64) -> Matrix2<f64> {
    let g1 = gamma - 1.0;
    let off = v1 * (v0 * v0 * (1.0 - 2.0 * gamma) - v1 * v1 * g1);
    Matrix2::new(
        v0 * (v0 * v0 + 3.0 * v1 * v1 * g1),
        off,
        off,
        v0 * (g1 * v0 * v0 + v1 * v1 * (2.0 * gamma - 1.0)),
    )
}

/// `B̄¹(v)`, cubic in `v`.
pub fn b1_bar(v0: f64, v1: f64, gamma: f64) -> Matrix2<f64> {
    let g1 = gamma - 1.0;
    let off = -v0 * (v0 * v0 * g1 - v1 * v1 * (1.0 - 2.0 * gamma));
    Matrix2::new(
        -v1 * ((1.0 - 2.0 * gamma) * v0 * v0 - v1 * v1 * g1),
        off,
        off,
        v1 * (3.0 * g1 * v0 * v0 + v1 * v1),
    )
}

/// `τḠ/Γ = (v₀² − v₁²)(v₀², −v₀v₁)`, the quartic part of the source.
///
/// The minus sign in the second component follows from the Christoffel
/// symbols of the Kasner metric; it is what makes the rest solution's
/// velocity perturbation decay like `(−τ)^{2Γ}`.
pub fn source_quartic(v0: f64, v1: f64) -> Vector2<f64> {
    let s = v0 * v0 - v1 * v1;
    Vector2::new(s * v0 * v0, -s * v0 * v1)
}

/// `Ḡ(τ, v) = (Γ/τ)(v₀² − v₁²)(v₀², −v₀v₁)`.
pub fn g_bar(tau: f64, v0: f64, v1: f64, big_gamma: f64) -> Vector2<f64> {
    source_quartic(v0, v1) * (big_gamma / tau)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalCoeffs {
    pub b0: Matrix2<f64>,
    pub b1: Matrix2<f64>,
    pub g: Vector2<f64>,
}

/// `(B̄⁰, B̄¹, Ḡ)` at `(τ, v)`. Fails where the system degenerates
/// (`v₀² = v₁²`).
pub fn physical_coeffs(tau: f64, v0: f64, v1: f64, params: &KasnerParams) -> Result<PhysicalCoeffs, EulerError> {
    if !(tau < 0.0) {
        return Err(EulerError::Time(tau));
    }
    let s = v0 * v0 - v1 * v1;
    if s.abs() <= f64::EPSILON * (v0 * v0 + v1 * v1) {
        return Err(EulerError::Degenerate(v0 * v0));
    }
    Ok(PhysicalCoeffs {
        b0: b0_bar(v0, v1, params.gamma),
        b1: b1_bar(v0, v1, params.gamma),
        g: g_bar(tau, v0, v1, params.big_gamma()),
    })
}

/// `∂_τV` from the physical system with fourth-order spatial differences;
/// `field.time` is τ and the components are `(V⁰, V¹)`.
pub fn physical_rhs(field: &Field, params: &KasnerParams) -> Result<Field, EulerError> {
    if field.dim != 2 {
        return Err(EulerError::Parameter(format!("fluid state has 2 components, got {}", field.dim)));
    }
    let dv = derivative(field, 4)?;
    let mut out = Field::zeros(field.grid, 2, field.time);
    for j in 0..field.n_points() {
        let v = field.point(j);
        let c = physical_coeffs(field.time, v[0], v[1], params)?;
        let w = dv.point(j);
        let rhs = c.g - c.b1 * Vector2::new(w[0], w[1]);
        let sol = c.b0.lu().solve(&rhs).ok_or(EulerError::Degenerate(v[0] * v[0]))?;
        out.point_mut(j).copy_from_slice(sol.as_slice());
    }
    Ok(out)
}

/// The fluid at rest: `V⁰ = −V_*(x)(−τ)^Γ`, `V¹ = 0`.
pub fn rest_solution(grid: PeriodicGrid, tau: f64, params: &KasnerParams, v_star: impl Fn(f64) -> f64) -> Field {
    let g = params.big_gamma();
    Field::from_fn(grid, 2, tau, |x| vec![-v_star(x) * (-tau).powf(g), 0.0])
}

/// Largest relative deviation of the discrete right-hand side on the rest
/// solution from its exact time derivative `(ΓV⁰/τ, 0)`.
pub fn rest_residual(grid: PeriodicGrid, tau: f64, params: &KasnerParams, v_star: f64) -> Result<f64, EulerError> {
    let field = rest_solution(grid, tau, params, |_| v_star);
    let rhs = physical_rhs(&field, params)?;
    let g = params.big_gamma();
    let mut worst = 0.0_f64;
    for j in 0..field.n_points() {
        let exact = g * field.point(j)[0] / tau;
        let r = rhs.point(j);
        worst = worst.max((r[0] - exact).abs() / exact.abs()).max(r[1].abs() / exact.abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> KasnerParams {
        KasnerParams::new(1.0, 4.0 / 3.0).unwrap()
    }

    #[test]
    fn unit_point_values() {
        let c = physical_coeffs(-1.0, 1.0, 0.0, &params()).unwrap();
        assert!((c.b0 - Matrix2::new(1.0, 0.0, 0.0, 1.0 / 3.0)).amax() < 1e-15);
        assert!((c.b1 - Matrix2::new(0.0, -1.0 / 3.0, -1.0 / 3.0, 0.0)).amax() < 1e-15);
        assert!((c.g - Vector2::new(-1.0 / 3.0, 0.0)).amax() < 1e-15);
    }

    #[test]
    fn matrices_are_symmetric() {
        for &(a, b) in &[(1.3, 0.2), (-0.7, 0.5), (2.0, -1.9)] {
            let (m0, m1) = (b0_bar(a, b, 1.4), b1_bar(a, b, 1.4));
            assert!((m0 - m0.transpose()).amax() <= 1e-13);
            assert!((m1 - m1.transpose()).amax() <= 1e-13);
        }
    }

    #[test]
    fn degenerate_point_rejected() {
        assert!(matches!(physical_coeffs(-1.0, 0.5, 0.5, &params()), Err(EulerError::Degenerate(_))));
        assert!(physical_coeffs(0.0, 1.0, 0.0, &params()).is_err());
    }

    #[test]
    fn cubic_and_quartic_homogeneity() {
        let (a, b, s) = (0.8, -0.3, -1.7);
        assert!((b0_bar(s * a, s * b, 1.2) - b0_bar(a, b, 1.2) * s.powi(3)).amax() < 1e-13);
        assert!((b1_bar(s * a, s * b, 1.2) - b1_bar(a, b, 1.2) * s.powi(3)).amax() < 1e-13);
        assert!((source_quartic(s * a, s * b) - source_quartic(a, b) * s.powi(4)).amax() < 1e-13);
    }

    #[test]
    fn rest_solution_is_exact() {
        let grid = PeriodicGrid::new(32, 2.0 * std::f64::consts::PI).unwrap();
        for tau in [-1.0, -0.01, -1e-6] {
            assert!(rest_residual(grid, tau, &params(), 1.7).unwrap() <= 1e-12);
        }
    }
}

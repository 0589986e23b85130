//! Finite-difference derivatives of coefficient evaluators and `Div B`.

use nalgebra::{DMatrix, DVector};

use crate::error::CoreError;
use crate::linalg::max_abs;
use crate::system::FuchsianSystem;

/// Base relative step of all central differences.
pub const FD_REL_STEP: f64 = 1e-5;

/// A derivative value with its Richardson error estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct Derivative {
    pub value: DMatrix<f64>,
    pub error_estimate: f64,
}

/// Central difference of a matrix-valued function of one real variable,
/// refined by one Richardson step (`h` and `h/2`).
pub fn central_derivative(f: impl Fn(f64) -> DMatrix<f64>, a: f64, h: f64) -> Derivative {
    let d = |s: f64| (f(a + s) - f(a - s)) / (2.0 * s);
    let d1 = d(h);
    let d2 = d(0.5 * h);
    let diff = &d2 - &d1;
    Derivative { error_estimate: max_abs(&diff) / 3.0, value: d2 + diff / 3.0 }
}

/// Step used for the time derivative: the usual relative step, kept well away
/// from the singular time.
pub fn time_step(t: f64) -> f64 {
    (FD_REL_STEP * t.abs().max(1.0)).min(0.25 * t.abs())
}

pub fn space_step(x: f64) -> f64 {
    FD_REL_STEP * x.abs().max(1.0)
}

/// Directional derivative `D_v M(v)·y` of a matrix-valued function of the
/// state, by central differences along `y/|y|`.
pub fn directional_derivative(
    f: impl Fn(&DVector<f64>) -> DMatrix<f64>,
    v: &DVector<f64>,
    y: &DVector<f64>,
) -> Derivative {
    let ny = y.norm();
    if ny == 0.0 {
        let z = f(v) * 0.0;
        return Derivative { value: z, error_estimate: 0.0 };
    }
    let dir = y / ny;
    let h = FD_REL_STEP * v.norm().max(1.0);
    let mut d = central_derivative(|s| f(&(v + &dir * s)), 0.0, h);
    d.value *= ny;
    d.error_estimate *= ny;
    d
}

/// `Div B` at one point together with the accumulated finite-difference
/// error estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct DivB {
    pub matrix: DMatrix<f64>,
    pub error_estimate: f64,
}

/// Assembles
///
/// ```text
/// Div B = ∂ₜB⁰ + D_vB⁰·(B⁰)⁻¹[−B¹w + (1/t)𝓑ℙv + F] + ∂ₓB¹ + D_vB¹·w
/// ```
///
/// on a flat chart with trivial connection. Every derivative is a central
/// difference of the evaluators.
pub fn div_b(
    system: &FuchsianSystem,
    t: f64,
    x: f64,
    v: &DVector<f64>,
    w: &DVector<f64>,
) -> Result<DivB, CoreError> {
    if t >= 0.0 {
        return Err(CoreError::Domain(format!("div_b needs t < 0, got {t}")));
    }
    let c = &system.coeffs;
    let pc = c.eval(t, x, v);
    let drive = -&pc.b1 * w + &pc.bc * (system.proj.p() * v) / t + &pc.f;
    let y = pc.b0.clone().lu().solve(&drive).ok_or(CoreError::SingularB0 { t, x })?;

    let dt_b0 = central_derivative(|s| c.b0(s, x, v), t, time_step(t));
    let dv_b0 = directional_derivative(|u| c.b0(t, x, u), v, &y);
    let dx_b1 = central_derivative(|s| c.b1(t, s, v), x, space_step(x));
    let dv_b1 = directional_derivative(|u| c.b1(t, x, u), v, w);

    Ok(DivB {
        matrix: dt_b0.value + dv_b0.value + dx_b1.value + dv_b1.value,
        error_estimate: dt_b0.error_estimate
            + dv_b0.error_estimate
            + dx_b1.error_estimate
            + dv_b1.error_estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projection::ProjectionPair;
    use crate::system::{Coefficients, ConstantCoefficients};
    use std::sync::Arc;

    fn constant_system() -> FuchsianSystem {
        let c = ConstantCoefficients {
            b0: DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]),
            b1: DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.5]),
            bc: DMatrix::identity(2, 2),
            f: DVector::zeros(2),
        };
        FuchsianSystem::new("const", ProjectionPair::identity(2), Arc::new(c), 1.0).unwrap()
    }

    #[test]
    fn constant_coefficients_give_zero() {
        let sys = constant_system();
        let v = DVector::from_vec(vec![0.2, -0.1]);
        let w = DVector::from_vec(vec![1.0, 3.0]);
        let d = div_b(&sys, -0.3, 1.1, &v, &w).unwrap();
        assert!(max_abs(&d.matrix) <= 1e-10);
    }

    struct TimeFlux;
    impl Coefficients for TimeFlux {
        fn dim(&self) -> usize {
            2
        }
        fn b0(&self, _: f64, _: f64, _: &DVector<f64>) -> DMatrix<f64> {
            DMatrix::identity(2, 2)
        }
        fn b1(&self, t: f64, _: f64, _: &DVector<f64>) -> DMatrix<f64> {
            DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, -1.0]) * t.sin()
        }
        fn bc(&self, _: f64, _: f64, _: &DVector<f64>) -> DMatrix<f64> {
            DMatrix::identity(2, 2)
        }
        fn f(&self, _: f64, _: f64, _: &DVector<f64>) -> DVector<f64> {
            DVector::zeros(2)
        }
    }

    #[test]
    fn state_independent_time_flux_gives_zero() {
        let sys = FuchsianSystem::new("tf", ProjectionPair::identity(2), Arc::new(TimeFlux), 1.0).unwrap();
        let d = div_b(&sys, -0.7, 0.4, &DVector::from_vec(vec![0.1, 0.2]), &DVector::from_vec(vec![5.0, 1.0]))
            .unwrap();
        assert!(max_abs(&d.matrix) <= 1e-10);
    }

    #[test]
    fn derivative_of_polynomial_is_accurate() {
        let d = central_derivative(|s| DMatrix::from_element(1, 1, s.powi(3)), 2.0, 1e-3);
        assert!((d.value[(0, 0)] - 12.0).abs() < 1e-9);
    }

    #[test]
    fn time_step_never_reaches_zero() {
        assert!(time_step(-1e-7) <= 0.25e-7);
        assert!((time_step(-3.0) - 3e-5).abs() < 1e-18);
    }
}

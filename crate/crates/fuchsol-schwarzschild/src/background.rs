//! Background functions of the cylinder at spatial infinity of a
//! Schwarzschild spacetime of mass `μ`, on `(t, r) ∈ (0, 1] × [0, 1)`.

use serde::Serialize;

use crate::error::SchwarzschildError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BackgroundFns {
    /// `A = (1+r)³(1−rt)/((1−r)(1+rt)³)`.
    pub a: f64,
    /// `𝒜 = 1 − tA(1−2rt)/(1−(rt)²)`.
    pub script_a: f64,
    /// `Ω = μ(1+rt)²/(2rt)`, infinite at `r = 0`.
    pub omega: f64,
    /// Ricci scalar `R = 24rt/(1+rt)²` of the conformal metric.
    pub r_scalar: f64,
}

fn check(t: f64, r: f64) -> Result<(), SchwarzschildError> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(SchwarzschildError::Domain(format!("t = {t} must lie in (0, 1]")));
    }
    if !(0.0..1.0).contains(&r) {
        return Err(SchwarzschildError::Domain(format!("r = {r} must lie in [0, 1)")));
    }
    Ok(())
}

/// `A`, written as `((1+r)/(1+rt))³ (1−rt)/(1−r)` so that each factor stays
/// of order one.
pub fn a_fn(t: f64, r: f64) -> f64 {
    let q = (1.0 + r) / (1.0 + r * t);
    q * q * q * (1.0 - r * t) / (1.0 - r)
}

/// `𝒜`, with `(1−2rt)/(1−(rt)²)` kept as one factor.
pub fn script_a_fn(t: f64, r: f64, a: f64) -> f64 {
    let s = r * t;
    1.0 - t * a * (1.0 - 2.0 * s) / ((1.0 - s) * (1.0 + s))
}

pub fn background_functions(t: f64, r: f64, mu: f64) -> Result<BackgroundFns, SchwarzschildError> {
    check(t, r)?;
    if !(mu > 0.0) {
        return Err(SchwarzschildError::Parameter(format!("mass must be positive, got {mu}")));
    }
    let a = a_fn(t, r);
    let s = r * t;
    Ok(BackgroundFns {
        a,
        script_a: script_a_fn(t, r, a),
        omega: if s == 0.0 { f64::INFINITY } else { mu * (1.0 + s) * (1.0 + s) / (2.0 * s) },
        r_scalar: 24.0 * s / ((1.0 + s) * (1.0 + s)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn limits_and_special_values() {
        for t in [1e-6, 0.3, 1.0] {
            let b = background_functions(t, 0.0, 1.0).unwrap();
            assert_eq!(b.a, 1.0);
            assert!((b.script_a - (1.0 - t)).abs() < 1e-15);
            assert_eq!(b.r_scalar, 0.0);
            assert!(b.omega.is_infinite());
            assert!((background_functions(t, 1e-12, 1.0).unwrap().a - 1.0).abs() < 1e-11);
        }
        for r in [0.0, 0.2, 0.7, 0.99] {
            assert!((background_functions(1.0, r, 2.0).unwrap().a - 1.0).abs() < 1e-12);
        }
        // R(1, 1) = 6 from the closed formula at the corner.
        assert_eq!(24.0 * 1.0 / 4.0, 6.0);
        assert!((background_functions(1.0, 0.999_999, 1.0).unwrap().r_scalar - 6.0).abs() < 1e-5);
    }

    #[test]
    fn domain_is_enforced() {
        assert!(background_functions(0.5, 1.0, 1.0).is_err());
        assert!(background_functions(0.0, 0.5, 1.0).is_err());
        assert!(background_functions(0.5, -0.1, 1.0).is_err());
        assert!(background_functions(0.5, 0.5, 0.0).is_err());
    }

    #[test]
    fn positivity_and_direct_formula() {
        let (t, r): (f64, f64) = (0.4, 0.6);
        let b = background_functions(t, r, 1.5).unwrap();
        let direct = (1.0 + r).powi(3) * (1.0 - r * t) / ((1.0 - r) * (1.0 + r * t).powi(3));
        assert!((b.a - direct).abs() < 1e-14 * direct);
        assert!(b.a > 0.0 && b.r_scalar >= 0.0);
        assert!((b.omega - 1.5 * (1.24f64).powi(2) / 0.48).abs() < 1e-14);
    }
}

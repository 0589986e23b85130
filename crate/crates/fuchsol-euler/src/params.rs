use serde::{Deserialize, Serialize};

use crate::error::EulerError;

/// Kasner exponents `(p₁, p₂, p₃)` for asymptotic velocity `K`.
pub fn kasner_exponents(k: f64) -> (f64, f64, f64) {
    let d = k * k + 3.0;
    ((k * k - 1.0) / d, 2.0 * (1.0 - k) / d, 2.0 * (1.0 + k) / d)
}

/// `Γ = (3γ − 2 − K²(2 − γ))/4`.
pub fn big_gamma(k: f64, gamma: f64) -> f64 {
    (3.0 * gamma - 2.0 - k * k * (2.0 - gamma)) / 4.0
}

/// Background and fluid parameters: asymptotic velocity `K` and the
/// equation-of-state index `γ` (`P = (γ−1)ρ`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KasnerParams {
    #[serde(rename = "K")]
    pub k_velocity: f64,
    pub gamma: f64,
}

impl KasnerParams {
    pub fn new(k_velocity: f64, gamma: f64) -> Result<Self, EulerError> {
        if !(gamma > 1.0 && gamma < 2.0) {
            return Err(EulerError::Parameter(format!("gamma must lie in (1, 2), got {gamma}")));
        }
        if !k_velocity.is_finite() {
            return Err(EulerError::Parameter("K must be finite".into()));
        }
        Ok(Self { k_velocity, gamma })
    }

    pub fn big_gamma(&self) -> f64 {
        big_gamma(self.k_velocity, self.gamma)
    }

    pub fn sound_speed_sq(&self) -> f64 {
        self.gamma - 1.0
    }

    /// Whether `0 < Γ < 1`, the regime where the stability result applies.
    pub fn in_regime(&self) -> bool {
        let g = self.big_gamma();
        g > 0.0 && g < 1.0
    }

    pub fn require_regime(&self) -> Result<f64, EulerError> {
        if self.in_regime() {
            Ok(self.big_gamma())
        } else {
            Err(EulerError::OutOfRegime(self.big_gamma()))
        }
    }
}

/// Pressure and energy density `(P, ρ)` from `V² = −V_αV^α`.
pub fn observables(v_sq: f64, gamma: f64) -> Result<(f64, f64), EulerError> {
    if !(v_sq > 0.0) {
        return Err(EulerError::NotTimelike(v_sq));
    }
    let p = v_sq.powf(-gamma / (2.0 * (gamma - 1.0)));
    Ok((p, p / (gamma - 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponent_examples() {
        assert_eq!(kasner_exponents(1.0), (0.0, 0.0, 1.0));
        let (a, b, c) = kasner_exponents(0.0);
        assert!((a + 1.0 / 3.0).abs() < 1e-15 && (b - 2.0 / 3.0).abs() < 1e-15 && (c - 2.0 / 3.0).abs() < 1e-15);
        for k in [0.0, 1.0, 3.0, -0.7] {
            let (a, b, c) = kasner_exponents(k);
            assert!((a + b + c - 1.0).abs() < 1e-14);
            assert!((a * a + b * b + c * c - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn gamma_examples() {
        assert!((big_gamma(1.0, 4.0 / 3.0) - 1.0 / 3.0).abs() < 1e-15);
        for k in [0.0, 2.0, 10.0] {
            assert_eq!(big_gamma(k, 2.0), 1.0);
        }
        let p = KasnerParams::new(3.0, 4.0 / 3.0).unwrap();
        assert!((p.big_gamma() + 1.0).abs() < 1e-15);
        assert!(!p.in_regime());
        assert!(matches!(p.require_regime(), Err(EulerError::OutOfRegime(_))));
        assert!(KasnerParams::new(1.0, 2.0).is_err());
    }

    #[test]
    fn observable_examples() {
        let (p, rho) = observables(1.0, 1.5).unwrap();
        assert_eq!(p, 1.0);
        assert!((rho - 2.0).abs() < 1e-15);
        let (p, rho) = observables(4.0, 4.0 / 3.0).unwrap();
        assert!((p - 1.0 / 16.0).abs() < 1e-15);
        assert!((p / rho - 1.0 / 3.0).abs() < 1e-15);
        assert!(observables(0.0, 1.5).is_err());
    }
}

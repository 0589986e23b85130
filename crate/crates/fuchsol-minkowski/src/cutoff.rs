//! Smooth cutoff `χ(ρ) = χ̂(ρ/ρ₀)` with `χ̂ ≡ 1` on `[−1, 1]` and support in
//! `[−1.9, 1.9] ⊂ (−2, 2)`.

/// Start and end of the transition of `χ̂`, in units of `ρ₀`.
pub const TRANSITION: (f64, f64) = (1.0, 1.9);

fn psi(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

fn dpsi(x: f64) -> f64 {
    if x > 0.0 {
        psi(x) / (x * x)
    } else {
        0.0
    }
}

/// Smooth step from 0 (x ≤ 0) to 1 (x ≥ 1).
fn step(x: f64) -> f64 {
    let (a, b) = (psi(x), psi(1.0 - x));
    a / (a + b)
}

fn dstep(x: f64) -> f64 {
    let (a, b) = (psi(x), psi(1.0 - x));
    let s = a + b;
    (dpsi(x) * b + a * dpsi(1.0 - x)) / (s * s)
}

pub fn chi_hat(s: f64) -> f64 {
    let (lo, hi) = TRANSITION;
    1.0 - step((s.abs() - lo) / (hi - lo))
}

pub fn chi_hat_prime(s: f64) -> f64 {
    let (lo, hi) = TRANSITION;
    -s.signum() * dstep((s.abs() - lo) / (hi - lo)) / (hi - lo)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cutoff {
    pub rho0: f64,
}

impl Cutoff {
    pub fn new(rho0: f64) -> Self {
        Self { rho0 }
    }

    pub fn chi(&self, rho: f64) -> f64 {
        chi_hat(rho / self.rho0)
    }

    pub fn dchi(&self, rho: f64) -> f64 {
        chi_hat_prime(rho / self.rho0) / self.rho0
    }

    /// Half-width of the periodic domain, `3ρ₀`.
    pub fn half_period(&self) -> f64 {
        3.0 * self.rho0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_and_support() {
        for s in [-1.0, -0.3, 0.0, 0.7, 1.0] {
            assert_eq!(chi_hat(s), 1.0);
        }
        for s in [-2.5, -1.9, 1.9, 1.95] {
            assert_eq!(chi_hat(s), 0.0);
        }
        assert!(chi_hat(1.45) > 0.0 && chi_hat(1.45) < 1.0);
        assert!((chi_hat(1.45) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn derivative_matches_differences() {
        for s in [1.1, 1.3, 1.6, -1.4, 1.85] {
            let h = 1e-6;
            let fd = (chi_hat(s + h) - chi_hat(s - h)) / (2.0 * h);
            assert!((fd - chi_hat_prime(s)).abs() < 1e-6, "{s}");
        }
        assert_eq!(chi_hat_prime(0.5), 0.0);
    }

    #[test]
    fn scaled_cutoff() {
        let c = Cutoff::new(0.5);
        assert_eq!(c.chi(0.5), 1.0);
        assert_eq!(c.chi(0.96), 0.0);
        assert!((c.dchi(0.7) - chi_hat_prime(1.4) / 0.5).abs() < 1e-15);
        assert_eq!(c.half_period(), 1.5);
    }
}

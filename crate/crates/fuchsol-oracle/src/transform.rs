//! The time change `τ = −(−t)^p` and its action on systems and on decay
//! predictions.

use std::sync::Arc;

use fuchsol_core::{
    decay_rate_table, transform_constants, Coefficients, DecayPrediction, FuchsianSystem, ImprovedFlags,
    SingularSplit, SplitParts, StructuralConstants,
};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::OracleError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    /// `t ↦ τ = −(−t)^p`
    Forward,
    /// `τ ↦ t = −(−τ)^{1/p}`
    Inverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeTransform {
    p: f64,
}

impl TimeTransform {
    pub fn new(p: f64) -> Result<Self, OracleError> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(OracleError::Parameter(format!("time-transform exponent must lie in (0, 1], got {p}")));
        }
        Ok(Self { p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn forward(&self, t: f64) -> f64 {
        -(-t).powf(self.p)
    }

    pub fn inverse(&self, tau: f64) -> f64 {
        -(-tau).powf(1.0 / self.p)
    }

    /// `dt/dτ = (−τ)^{(1−p)/p}/p`, the factor picked up by B¹ and F.
    pub fn jacobian(&self, tau: f64) -> f64 {
        (-tau).powf((1.0 - self.p) / self.p) / self.p
    }
}

pub fn map_time(t: f64, p: f64, direction: Direction) -> Result<f64, OracleError> {
    if !(t < 0.0) {
        return Err(OracleError::Domain(format!("time must be negative, got {t}")));
    }
    let tr = TimeTransform::new(p)?;
    Ok(match direction {
        Direction::Forward => tr.forward(t),
        Direction::Inverse => tr.inverse(t),
    })
}

struct Transformed {
    inner: Arc<dyn Coefficients>,
    split: Option<Arc<dyn SingularSplit>>,
    tr: TimeTransform,
}

impl Coefficients for Transformed {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn b0(&self, tau: f64, x: f64, v: &DVector<f64>) -> DMatrix<f64> {
        self.inner.b0(self.tr.inverse(tau), x, v)
    }
    fn b1(&self, tau: f64, x: f64, v: &DVector<f64>) -> DMatrix<f64> {
        self.inner.b1(self.tr.inverse(tau), x, v) * self.tr.jacobian(tau)
    }
    fn bc(&self, tau: f64, x: f64, v: &DVector<f64>) -> DMatrix<f64> {
        self.inner.bc(self.tr.inverse(tau), x, v) / self.tr.p
    }
    fn f(&self, tau: f64, x: f64, v: &DVector<f64>) -> DVector<f64> {
        self.inner.f(self.tr.inverse(tau), x, v) * self.tr.jacobian(tau)
    }
}

// Multiplying the p-split by dt/dτ = |t|^{1−p}/p turns the weights
// |t|^{−(1−p)}, |t|^{−(1−p/2)}, |t|^{−1} into 1/p, |τ|^{−1/2}/p, |τ|^{−1}/p.
impl SingularSplit for Transformed {
    fn parts(&self, tau: f64, x: f64, v: &DVector<f64>) -> SplitParts {
        let s = self.split.as_ref().expect("split is attached only when present");
        let parts = s.parts(self.tr.inverse(tau), x, v);
        let k = 1.0 / self.tr.p;
        SplitParts {
            b: [&parts.b[0] * k, &parts.b[1] * k, &parts.b[2] * k],
            f_tilde: parts.f_tilde * k,
            f0: parts.f0 * k,
            f1: parts.f1 * k,
            f2: parts.f2 * k,
        }
    }
}

/// The τ-formulation of `system` under `τ = −(−t)^p`. The singular split
/// carries over (as a `p = 1` split) when `p` equals the system's own split
/// exponent; otherwise the result has no split attached.
pub fn transform_system(system: &FuchsianSystem, p: f64) -> Result<FuchsianSystem, OracleError> {
    let tr = TimeTransform::new(p)?;
    let split = system.split.clone().filter(|s| (s.p_exponent() - p).abs() < 1e-12);
    let has_split = split.is_some();
    let coeffs = Arc::new(Transformed { inner: system.coeffs.clone(), split, tr });
    let (ta, tb) = system.t_window;
    let mut out = FuchsianSystem::new(format!("{}-tau", system.name), system.proj.clone(), coeffs.clone(), system.ball_radius)?
        .with_inner_product(system.inner_product.clone())?
        .with_domain(system.x0, system.period)
        .with_t_window(tr.forward(ta), tr.forward(tb));
    if has_split {
        out = out.with_split(coeffs);
    }
    Ok(out)
}

/// Re-expresses a prediction for the τ-system in the original time: every
/// exponent (and ζ) is multiplied by `p` because |τ| = |t|^p.
pub fn map_prediction(pred: &DecayPrediction, p: f64) -> DecayPrediction {
    let scale = |v: &[f64]| v.iter().map(|e| e * p).collect::<Vec<_>>();
    DecayPrediction {
        zeta: pred.zeta * p,
        regime: pred.regime,
        exponent_pu: pred.exponent_pu * p,
        pu_terms: scale(&pred.pu_terms),
        correction_term: pred.correction_term,
        perp_rule: pred.perp_rule,
        exponent_pperp: pred.exponent_pperp * p,
        pperp_terms: scale(&pred.pperp_terms),
    }
}

/// Outcome of comparing the direct p-table with the mapped τ-table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransformCaseResult {
    pub direct: DecayPrediction,
    pub mapped: DecayPrediction,
    pub cases_match: bool,
    pub max_exponent_gap: f64,
}

fn gap(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn compare_transformed_prediction(c: &StructuralConstants, flags: ImprovedFlags) -> TransformCaseResult {
    let k = c.k_reg;
    let direct = decay_rate_table(c, k, flags);
    let mapped = map_prediction(&decay_rate_table(&transform_constants(c), k, flags), c.p_exponent);
    let cases_match = direct.regime == mapped.regime
        && direct.perp_rule == mapped.perp_rule
        && direct.correction_term == mapped.correction_term;
    let max_exponent_gap = if direct.pu_terms.is_empty() && mapped.pu_terms.is_empty() {
        0.0
    } else {
        gap(&direct.pu_terms, &mapped.pu_terms).max(gap(&direct.pperp_terms, &mapped.pperp_terms))
    };
    TransformCaseResult { direct, mapped, cases_match, max_exponent_gap }
}

/// Twenty constant sets covering every regime, the |t|^{p/2} correction and
/// each ℙ⊥ rule, for p ∈ {0.25, 0.5, 0.8, 1}.
pub fn transform_case_table() -> Vec<(StructuralConstants, ImprovedFlags)> {
    let ps = [0.25, 0.5, 0.8, 1.0];
    // (κ, β₁, λ₁, flags) chosen so ζ/p spans Fast, Intermediate, Slow and
    // Inapplicable for every p.
    let shapes: [(f64, f64, f64, ImprovedFlags); 5] = [
        (2.0, 0.0, 0.0, ImprovedFlags::default()),
        (0.8, 0.1, 0.3, ImprovedFlags::default()),
        (0.3, 0.1, 0.3, ImprovedFlags { pperp_b_vanish: true, pperp_all_vanish: false }),
        (0.1, 0.02, 0.0, ImprovedFlags { pperp_b_vanish: false, pperp_all_vanish: true }),
        (0.2, 0.6, 0.0, ImprovedFlags::default()),
    ];
    let mut out = Vec::with_capacity(20);
    for &p in &ps {
        for &(kappa, beta1, lambda1, flags) in &shapes {
            let mut c = StructuralConstants::principal(kappa * p, 1.0, 1.0);
            c.beta[1] = beta1 * p;
            c.lambda[0] = lambda1;
            c.sigma_loss = 0.01 * p;
            c.p_exponent = p;
            out.push((c, flags));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use fuchsol_core::{ConstantCoefficients, ProjectionPair, Regime};

    #[test]
    fn map_time_examples() {
        assert_eq!(map_time(-0.3, 1.0, Direction::Forward).unwrap(), -0.3);
        assert!((map_time(-0.25, 0.5, Direction::Forward).unwrap() + 0.5).abs() < 1e-15);
        for &t in &[-1e-6, -0.3, -1.0, -7.5] {
            let tau = map_time(t, 0.37, Direction::Forward).unwrap();
            let back = map_time(tau, 0.37, Direction::Inverse).unwrap();
            assert!((back / t - 1.0).abs() < 1e-14);
        }
        assert!(map_time(0.0, 0.5, Direction::Forward).is_err());
        assert!(map_time(-1.0, 0.0, Direction::Forward).is_err());
    }

    #[test]
    fn transform_is_increasing() {
        let tr = TimeTransform::new(0.4).unwrap();
        let ts = [-3.0, -1.0, -0.5, -1e-3];
        assert!(ts.windows(2).all(|w| tr.forward(w[0]) < tr.forward(w[1])));
    }

    fn fixture() -> FuchsianSystem {
        let c = ConstantCoefficients {
            b0: DMatrix::from_row_slice(2, 2, &[2.0, 0.1, 0.1, 1.0]),
            b1: DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]),
            bc: DMatrix::identity(2, 2) * 1.5,
            f: DVector::from_vec(vec![1.0, -1.0]),
        };
        FuchsianSystem::new("fixture", ProjectionPair::identity(2), Arc::new(c), 1.0).unwrap()
    }

    #[test]
    fn unit_exponent_is_identity() {
        let sys = fixture();
        let tr = transform_system(&sys, 1.0).unwrap();
        let v = DVector::from_vec(vec![0.2, -0.1]);
        for &t in &[-0.9, -0.1, -1e-4] {
            let a = sys.coeffs.eval(t, 0.3, &v);
            let b = tr.coeffs.eval(t, 0.3, &v);
            assert_eq!(a.b0, b.b0);
            assert_eq!(a.b1, b.b1);
            assert_eq!(a.bc, b.bc);
            assert_eq!(a.f, b.f);
        }
    }

    #[test]
    fn coefficients_scale_as_expected() {
        let sys = fixture();
        let tr = transform_system(&sys, 0.5).unwrap();
        let v = DVector::zeros(2);
        let tau = -0.2;
        let c = tr.coeffs.eval(tau, 0.0, &v);
        // t = −0.04, dt/dτ = 2·0.2 = 0.4
        assert!((c.b1[(0, 1)] - 0.4).abs() < 1e-15);
        assert!((c.bc[(0, 0)] - 3.0).abs() < 1e-15);
        assert!((c.f[0] - 0.4).abs() < 1e-15);
        assert!(tr.split.is_none());
        assert!((tr.t_window.0 + 1.0).abs() < 1e-15);
    }

    #[test]
    fn table_covers_every_case() {
        let table = transform_case_table();
        assert_eq!(table.len(), 20);
        let regimes: Vec<Regime> = table.iter().map(|(c, f)| decay_rate_table(c, c.k_reg, *f).regime).collect();
        for r in [Regime::Fast, Regime::Intermediate, Regime::Slow, Regime::Inapplicable] {
            assert!(regimes.contains(&r), "missing {r:?}");
        }
        for (c, f) in &table {
            let r = compare_transformed_prediction(c, *f);
            assert!(r.cases_match, "{c:?}");
            assert!(r.max_exponent_gap < 1e-12);
        }
    }
}

//! Structural constants, the κ-gate, ζ and the decay-rate case table.

use serde::{Deserialize, Serialize};

/// Constants of the coefficient hypotheses, as measured or declared.
///
/// `lambda[a]` holds λ₍ₐ₊₁₎ and `beta[a]` holds β₍ₐ₎.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuralConstants {
    pub kappa: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub kappa_tilde: f64,
    pub gamma1_tilde: f64,
    pub lambda: [f64; 3],
    pub alpha: f64,
    pub beta: [f64; 8],
    pub theta: f64,
    pub b_const: f64,
    pub b_tilde: f64,
    pub sigma_loss: f64,
    pub k_reg: u32,
    pub p_exponent: f64,
}

impl StructuralConstants {
    /// Constants with the given principal bounds and every correction zero.
    pub fn principal(kappa: f64, gamma1: f64, gamma2: f64) -> Self {
        Self {
            kappa,
            gamma1,
            gamma2,
            kappa_tilde: kappa,
            gamma1_tilde: gamma1,
            lambda: [0.0; 3],
            alpha: 0.0,
            beta: [0.0; 8],
            theta: 0.0,
            b_const: 0.0,
            b_tilde: 0.0,
            sigma_loss: 0.05,
            k_reg: 2,
            p_exponent: 1.0,
        }
    }

    /// Checks the orderings γ₁ ≥ γ̃₁ > 0, κ̃ ≥ κ > 0 and 𝚋 ≥ 𝚋̃ ≥ 0.
    pub fn ordering_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.gamma1 >= self.gamma1_tilde && self.gamma1_tilde > 0.0) {
            out.push(format!("gamma1 ({}) >= gamma1_tilde ({}) > 0 fails", self.gamma1, self.gamma1_tilde));
        }
        if !(self.kappa_tilde >= self.kappa && self.kappa > 0.0) {
            out.push(format!("kappa_tilde ({}) >= kappa ({}) > 0 fails", self.kappa_tilde, self.kappa));
        }
        if !(self.b_const >= self.b_tilde && self.b_tilde >= 0.0) {
            out.push(format!("b ({}) >= b_tilde ({}) >= 0 fails", self.b_const, self.b_tilde));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GateResult {
    pub pass: bool,
    pub lhs: f64,
    pub rhs: f64,
}

/// The κ-gate: κ > ½γ₁·max{β₁+β₃+β₅+β₇+2λ₃, β₁+2k(k+1)𝚋}.
pub fn kappa_gate(c: &StructuralConstants, k: u32) -> GateResult {
    let b = &c.beta;
    let k = f64::from(k);
    let first = b[1] + b[3] + b[5] + b[7] + 2.0 * c.lambda[2];
    let second = b[1] + 2.0 * k * (k + 1.0) * c.b_const;
    let rhs = 0.5 * c.gamma1 * first.max(second);
    GateResult { pass: c.kappa > rhs, lhs: c.kappa, rhs }
}

/// ζ = κ̃ − ½γ̃₁(β₁ + (k−1)k·𝚋̃).
pub fn zeta(c: &StructuralConstants, k: u32) -> f64 {
    let k = f64::from(k);
    c.kappa_tilde - 0.5 * c.gamma1_tilde * (c.beta[1] + (k - 1.0) * k * c.b_tilde)
}

/// Case of the ℙu decay table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    /// ζ > p
    Fast,
    /// p/2 < ζ ≤ p
    Intermediate,
    /// 0 < ζ ≤ p/2
    Slow,
    /// ζ ≤ 0: the decay estimate does not apply.
    Inapplicable,
}

/// Which rule produced the ℙ⊥ rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PerpRule {
    /// Generic table, ζ > p/2.
    GenericAboveHalf,
    /// Generic table, ζ ≤ p/2.
    GenericBelowHalf,
    /// ℙ⊥B₁ = ℙ⊥B₂ = ℙ⊥F₁ = ℙ⊥F₂ = 0 and ℙ⊥(B⁰)⁻¹ℙ = 0.
    AllVanish,
    /// ℙ⊥B₁ = ℙ⊥B₂ = 0 only.
    BVanish,
    Inapplicable,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImprovedFlags {
    pub pperp_b_vanish: bool,
    pub pperp_all_vanish: bool,
}

/// Predicted decay exponents of ‖ℙu‖ and ‖ℙ⊥u − ℙ⊥u(0)‖ in `H^{k−1}`.
///
/// Each bound is a sum of powers of |t|; `*_terms` lists the exponents and
/// the headline exponent is the smallest one (the dominant term as t → 0⁻).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayPrediction {
    pub zeta: f64,
    pub regime: Regime,
    pub exponent_pu: f64,
    pub pu_terms: Vec<f64>,
    /// Whether the (λ₁+α)|t|^{p/2} term is present.
    pub correction_term: bool,
    pub perp_rule: PerpRule,
    pub exponent_pperp: f64,
    pub pperp_terms: Vec<f64>,
}

fn min_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Case table of the decay estimates for the exponent `p` stored in `c`.
pub fn decay_rate_table(c: &StructuralConstants, k: u32, flags: ImprovedFlags) -> DecayPrediction {
    let z = zeta(c, k);
    let p = c.p_exponent;
    let s = c.sigma_loss;
    let corr = c.lambda[0] + c.alpha > 0.0;
    if z <= 0.0 {
        return DecayPrediction {
            zeta: z,
            regime: Regime::Inapplicable,
            exponent_pu: f64::NAN,
            pu_terms: vec![],
            correction_term: false,
            perp_rule: PerpRule::Inapplicable,
            exponent_pperp: f64::NAN,
            pperp_terms: vec![],
        };
    }
    let (regime, mut pu_terms) = if z > p {
        (Regime::Fast, vec![p])
    } else if z > 0.5 * p {
        (Regime::Intermediate, vec![z - s])
    } else {
        (Regime::Slow, vec![z - s])
    };
    let correction_term = corr && regime != Regime::Slow;
    if correction_term {
        pu_terms.push(0.5 * p);
    }
    let (perp_rule, pperp_terms) = if flags.pperp_all_vanish {
        (PerpRule::AllVanish, vec![p])
    } else if flags.pperp_b_vanish {
        if z > p {
            (PerpRule::BVanish, vec![p])
        } else {
            (PerpRule::BVanish, vec![p, 2.0 * (z - s)])
        }
    } else if z > 0.5 * p {
        (PerpRule::GenericAboveHalf, vec![0.5 * p, z - s])
    } else {
        (PerpRule::GenericBelowHalf, vec![z - s])
    };
    DecayPrediction {
        zeta: z,
        regime,
        exponent_pu: min_of(&pu_terms),
        pu_terms,
        correction_term,
        perp_rule,
        exponent_pperp: min_of(&pperp_terms),
        pperp_terms,
    }
}

/// Constants of the system obtained by the time change τ = −(−t)^p.
///
/// The τ-system has B̄⁰ = B⁰ and 𝓑̄ = 𝓑/p, and its singular parts are the
/// original ones divided by `p`; hence κ, β, θ, λ, α, 𝚋 and σ scale by 1/p,
/// the γ's are unchanged and the result is a `p = 1` system.
pub fn transform_constants(c: &StructuralConstants) -> StructuralConstants {
    let p = c.p_exponent;
    let mut out = c.clone();
    out.kappa /= p;
    out.kappa_tilde /= p;
    out.lambda.iter_mut().for_each(|l| *l /= p);
    out.alpha /= p;
    out.beta.iter_mut().for_each(|b| *b /= p);
    out.theta /= p;
    out.b_const /= p;
    out.b_tilde /= p;
    out.sigma_loss /= p;
    out.p_exponent = 1.0;
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gate_passes_without_corrections() {
        let c = StructuralConstants::principal(1.0, 3.0, 1.0);
        let g = kappa_gate(&c, 2);
        assert!(g.pass);
        assert_eq!(g.rhs, 0.0);
    }

    #[test]
    fn gate_fails_hand_example() {
        let mut c = StructuralConstants::principal(0.5, 1.0, 1.0);
        c.beta[1] = 2.0;
        let g = kappa_gate(&c, 2);
        assert!(!g.pass);
        assert_eq!(g.rhs, 1.0);
    }

    #[test]
    fn zeta_hand_example() {
        let mut c = StructuralConstants::principal(1.0, 1.0, 1.0);
        c.beta[1] = 0.2;
        c.b_tilde = 0.01;
        c.b_const = 0.01;
        assert!((zeta(&c, 4) - 0.84).abs() < 1e-15);
        let plain = StructuralConstants::principal(0.7, 2.0, 1.0);
        assert_eq!(zeta(&plain, 5), 0.7);
    }

    #[test]
    fn table_fast_case() {
        let c = StructuralConstants::principal(2.0, 1.0, 2.0);
        let d = decay_rate_table(&c, 2, ImprovedFlags::default());
        assert_eq!(d.regime, Regime::Fast);
        assert_eq!(d.exponent_pu, 1.0);
        assert_eq!(d.pperp_terms, vec![0.5, 2.0 - 0.05]);
        assert_eq!(d.exponent_pperp, 0.5);
    }

    #[test]
    fn table_intermediate_case() {
        let c = StructuralConstants::principal(0.9, 1.0, 1.0);
        let d = decay_rate_table(&c, 2, ImprovedFlags::default());
        assert_eq!(d.regime, Regime::Intermediate);
        assert!((d.exponent_pu - 0.85).abs() < 1e-15);
    }

    #[test]
    fn all_vanish_overrides_perp_rate() {
        for kappa in [0.2, 0.7, 3.0] {
            let c = StructuralConstants::principal(kappa, 1.0, 1.0);
            let flags = ImprovedFlags { pperp_all_vanish: true, pperp_b_vanish: false };
            assert_eq!(decay_rate_table(&c, 2, flags).exponent_pperp, 1.0);
        }
    }

    #[test]
    fn correction_term_caps_rate() {
        let mut c = StructuralConstants::principal(2.0, 1.0, 1.0);
        c.alpha = 0.1;
        let d = decay_rate_table(&c, 2, ImprovedFlags::default());
        assert!(d.correction_term);
        assert_eq!(d.exponent_pu, 0.5);
    }

    #[test]
    fn nonpositive_zeta_is_flagged() {
        let mut c = StructuralConstants::principal(0.1, 1.0, 1.0);
        c.beta[1] = 1.0;
        assert_eq!(decay_rate_table(&c, 2, ImprovedFlags::default()).regime, Regime::Inapplicable);
    }

    #[test]
    fn pure_functions_are_bitwise_stable() {
        let mut c = StructuralConstants::principal(0.37, 2.3, 1.1);
        c.beta = [0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08];
        c.b_const = 0.003;
        c.b_tilde = 0.002;
        assert_eq!(kappa_gate(&c, 3).rhs.to_bits(), kappa_gate(&c, 3).rhs.to_bits());
        assert_eq!(zeta(&c, 3).to_bits(), zeta(&c, 3).to_bits());
    }
}

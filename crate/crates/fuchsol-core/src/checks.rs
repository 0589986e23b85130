//! Sampling auditors for the structural hypotheses and estimators for the
//! structural constants.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::constants::{kappa_gate, zeta, GateResult, StructuralConstants};
use crate::diff::{central_derivative, div_b, space_step};
use crate::error::CoreError;
use crate::linalg::{
    max_abs, max_abs_vec, max_eig_sym, min_eig_sym, op_norm, range_basis, spd_inv_sqrt, sym, HFrame,
};
use crate::projection::check_projection;
use crate::system::{FuchsianSystem, Sample, SampleSpec, SplitParts};

/// One failed structural check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub kind: String,
    pub detail: String,
    pub t: Option<f64>,
    pub x: Option<f64>,
    pub value: f64,
}

impl Violation {
    fn at(kind: &str, s: &Sample, value: f64, detail: String) -> Self {
        Self { kind: kind.into(), detail, t: Some(s.t), x: Some(s.x), value }
    }
}

/// Tightest constants in γ₁⁻¹I ≤ B⁰ ≤ κ⁻¹𝓑 ≤ γ₂I over a sample set, plus
/// the ℙ-restricted pair (κ̃, γ̃₁).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointwiseBounds {
    pub gamma1: f64,
    pub kappa: f64,
    pub gamma2: f64,
    pub kappa_tilde: f64,
    pub gamma1_tilde: f64,
    pub violations: Vec<Violation>,
}

fn frame(system: &FuchsianSystem) -> Result<HFrame, CoreError> {
    HFrame::new(&system.inner_product)
        .ok_or_else(|| CoreError::Parameter("inner product is not positive definite".into()))
}

fn check_admissible(system: &FuchsianSystem, s: &Sample) -> Result<(), CoreError> {
    if !(s.t < 0.0) {
        return Err(CoreError::Domain(format!("sample time {} is not negative", s.t)));
    }
    if system.norm_h(&s.v) >= system.ball_radius {
        return Err(CoreError::Domain(format!(
            "sample |v| = {} outside ball of radius {}",
            system.norm_h(&s.v),
            system.ball_radius
        )));
    }
    Ok(())
}

/// Smallest generalized eigenvalue of the pencil (sym 𝓑, B⁰) with B⁰ SPD.
fn pencil_min(bc: &DMatrix<f64>, b0: &DMatrix<f64>) -> Option<f64> {
    let r = spd_inv_sqrt(b0)?;
    Some(min_eig_sym(&(&r * sym(bc) * &r)))
}

pub fn check_pointwise_bounds(system: &FuchsianSystem, samples: &[Sample]) -> Result<PointwiseBounds, CoreError> {
    let fr = frame(system)?;
    let pp = sym(&fr.to_frame(system.proj.p()));
    let q = range_basis(&pp);
    let has_range = q.ncols() > 0;

    let mut gamma1 = 0.0_f64;
    let mut kappa = f64::INFINITY;
    let mut bc_max = f64::NEG_INFINITY;
    let mut gamma1_tilde = 0.0_f64;
    let mut kappa_tilde = f64::INFINITY;
    let mut violations = Vec::new();

    for s in samples {
        check_admissible(system, s)?;
        let b0 = sym(&fr.to_frame(&system.coeffs.b0(s.t, s.x, &s.v)));
        let bc = sym(&fr.to_frame(&system.coeffs.bc(s.t, s.x, &s.v)));
        let lmin = min_eig_sym(&b0);
        if !(lmin > 0.0) {
            return Err(CoreError::NotPositiveDefinite { t: s.t, x: s.x, min_eig: lmin });
        }
        gamma1 = gamma1.max(1.0 / lmin);
        let k = pencil_min(&bc, &b0).expect("B0 checked positive definite");
        if !(k > 0.0) {
            violations.push(Violation::at(
                "coercivity",
                s,
                k,
                "sym(Bc) is not positive relative to B0".into(),
            ));
        }
        kappa = kappa.min(k);
        bc_max = bc_max.max(max_eig_sym(&bc));
        if has_range {
            let b0r = q.transpose() * &b0 * &q;
            let bcr = q.transpose() * &bc * &q;
            gamma1_tilde = gamma1_tilde.max(1.0 / min_eig_sym(&b0r));
            if let Some(kt) = pencil_min(&bcr, &b0r) {
                kappa_tilde = kappa_tilde.min(kt);
            }
        }
    }
    let gamma2 = if kappa > 0.0 { bc_max / kappa } else { f64::INFINITY };
    if !has_range {
        kappa_tilde = kappa;
        gamma1_tilde = gamma1;
    }
    Ok(PointwiseBounds { gamma1, kappa, gamma2, kappa_tilde, gamma1_tilde, violations })
}

/// Options for the full structural audit.
#[derive(Debug, Clone, Serialize)]
pub struct AuditOptions {
    pub samples: SampleSpec,
    pub k_reg: u32,
    pub sigma_loss: f64,
    /// Treat a failing κ-gate as a violation.
    pub enforce_gate: bool,
    pub tol_symmetry: f64,
    pub tol_split: f64,
}

impl AuditOptions {
    pub fn new(samples: SampleSpec) -> Self {
        Self { samples, k_reg: 2, sigma_loss: 0.05, enforce_gate: true, tol_symmetry: 1e-10, tol_split: 1e-9 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SampleSummary {
    pub count: usize,
    pub seed: u64,
    pub t_window: (f64, f64),
    pub radius: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Residuals {
    pub projection_idempotency: f64,
    pub projection_symmetry: f64,
    pub b0_symmetry: f64,
    pub b1_symmetry: f64,
    pub commutator: f64,
    pub split_recomposition: f64,
    pub pf2: f64,
    pub div_b_fd_error: f64,
}

/// Structural report: `{system, samples, constants, violations}` plus the
/// measured residuals, the κ-gate and ζ.
#[derive(Debug, Clone, Serialize)]
pub struct StructuralReport {
    pub system: String,
    pub samples: SampleSummary,
    pub constants: StructuralConstants,
    pub violations: Vec<Violation>,
    pub residuals: Residuals,
    pub kappa_gate: GateResult,
    pub zeta: f64,
    pub pass: bool,
}

fn split_parts(system: &FuchsianSystem, s: &Sample) -> SplitParts {
    match &system.split {
        Some(sp) => sp.parts(s.t, s.x, &s.v),
        None => {
            let n = system.fiber_dim();
            let mut parts = SplitParts::zeros(n);
            parts.b[0] = system.coeffs.b1(s.t, s.x, &s.v);
            parts.f0 = system.coeffs.f(s.t, s.x, &s.v);
            parts
        }
    }
}

/// Cascade fit of `|block| ≤ θ + |t|^{-1/2} β_even·g + |t|^{-1} β_odd·g`
/// where `g` is a known weight (1, q or q²). Returns `(β_even, β_odd, θ)`.
fn cascade(rows: &[(f64, f64, f64)], g_even: impl Fn(f64) -> f64, g_odd: impl Fn(f64) -> f64, t_cut: f64) -> (f64, f64, f64) {
    // rows: (|t|, block norm, q = |ℙv|/R)
    let usable = |q: f64| q >= 0.25;
    let mut odd = 0.0_f64;
    for &(at, val, q) in rows {
        let g = g_odd(q);
        if at <= t_cut && (g == 1.0 || usable(q)) && g > 0.0 {
            odd = odd.max(at * val / g);
        }
    }
    let mut even = 0.0_f64;
    for &(at, val, q) in rows {
        let g = g_even(q);
        let rem = val - odd * g_odd(q) / at;
        if rem > 0.0 && (g == 1.0 || usable(q)) && g > 0.0 {
            even = even.max(at.sqrt() * rem / g);
        }
    }
    let mut theta = 0.0_f64;
    for &(at, val, q) in rows {
        let rem = val - odd * g_odd(q) / at - even * g_even(q) / at.sqrt();
        theta = theta.max(rem);
    }
    (even, odd, theta)
}

/// Full sampling audit: projection, symmetry, commutation, split
/// consistency, constants, κ-gate and ζ.
pub fn audit_system(system: &FuchsianSystem, opts: &AuditOptions) -> Result<StructuralReport, CoreError> {
    let samples = system.samples(&opts.samples)?;
    let (constants, mut violations, residuals) = estimate_constants_inner(system, &samples, opts)?;
    let gate = kappa_gate(&constants, opts.k_reg);
    if opts.enforce_gate && !gate.pass {
        violations.push(Violation {
            kind: "kappa_gate".into(),
            detail: format!("kappa = {} does not exceed {}", gate.lhs, gate.rhs),
            t: None,
            x: None,
            value: gate.rhs - gate.lhs,
        });
    }
    let z = zeta(&constants, opts.k_reg);
    Ok(StructuralReport {
        system: system.name.clone(),
        samples: SampleSummary {
            count: opts.samples.count,
            seed: opts.samples.seed,
            t_window: opts.samples.t_window,
            radius: opts.samples.radius_fraction * system.ball_radius,
        },
        pass: violations.is_empty(),
        constants,
        violations,
        residuals,
        kappa_gate: gate,
        zeta: z,
    })
}

/// Measured structural constants over the given samples.
pub fn estimate_constants(
    system: &FuchsianSystem,
    samples: &[Sample],
    opts: &AuditOptions,
) -> Result<StructuralConstants, CoreError> {
    estimate_constants_inner(system, samples, opts).map(|(c, _, _)| c)
}

fn estimate_constants_inner(
    system: &FuchsianSystem,
    samples: &[Sample],
    opts: &AuditOptions,
) -> Result<(StructuralConstants, Vec<Violation>, Residuals), CoreError> {
    let n = system.fiber_dim();
    let fr = frame(system)?;
    let h = &system.inner_product;
    let p = system.proj.p().clone();
    let pp = system.proj.perp().clone();
    let r = system.ball_radius;
    let pexp = system.p_exponent();

    let proj = check_projection(&p, 1e-12)?;
    let bounds = check_pointwise_bounds(system, samples)?;
    let mut violations = bounds.violations.clone();
    if !proj.pass {
        violations.push(Violation {
            kind: "projection".into(),
            detail: format!(
                "idempotency {:e}, symmetry {:e}",
                proj.idempotency_residual, proj.symmetry_residual
            ),
            t: None,
            x: None,
            value: proj.idempotency_residual.max(proj.symmetry_residual),
        });
    }

    let mut res = Residuals {
        projection_idempotency: proj.idempotency_residual,
        projection_symmetry: proj.symmetry_residual,
        b0_symmetry: 0.0,
        b1_symmetry: 0.0,
        commutator: 0.0,
        split_recomposition: 0.0,
        pf2: 0.0,
        div_b_fd_error: 0.0,
    };

    let opn = |m: &DMatrix<f64>| op_norm(&fr.to_frame(m));
    let vn = |v: &DVector<f64>| system.norm_h(v);

    let min_t = samples.iter().map(|s| s.t.abs()).fold(f64::INFINITY, f64::min);
    let t_cut = 10.0 * min_t;

    let mut wrng = ChaCha8Rng::seed_from_u64(opts.samples.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut lambda = [0.0_f64; 3];
    let mut alpha = 0.0_f64;
    let mut blocks: [Vec<(f64, f64, f64)>; 4] = Default::default();
    let mut b_terms = [0.0_f64; 2];
    let mut bt_terms = [0.0_f64; 2];

    for s in samples {
        let pc = system.coeffs.eval(s.t, s.x, &s.v);
        let hb0 = h * &pc.b0;
        let hb1 = h * &pc.b1;
        let r0 = max_abs(&(&hb0 - hb0.transpose()));
        let r1 = max_abs(&(&hb1 - hb1.transpose()));
        let rc = max_abs(&(&p * &pc.bc - &pc.bc * &p));
        res.b0_symmetry = res.b0_symmetry.max(r0);
        res.b1_symmetry = res.b1_symmetry.max(r1);
        res.commutator = res.commutator.max(rc);
        if r0 > opts.tol_symmetry {
            violations.push(Violation::at("b0_symmetry", s, r0, "hB0 not symmetric".into()));
        }
        if r1 > opts.tol_symmetry {
            violations.push(Violation::at("b1_symmetry", s, r1, "hB1 not symmetric".into()));
        }
        if rc > opts.tol_symmetry {
            violations.push(Violation::at("commutator", s, rc, "[P, Bc] != 0".into()));
        }

        let parts = split_parts(system, s);
        if system.split.is_some() {
            let b1r = parts.recompose_b1(s.t, pexp);
            let fr_ = parts.recompose_f(s.t, pexp);
            let eb = max_abs(&(&b1r - &pc.b1)) / max_abs(&pc.b1).max(1.0);
            let ef = max_abs_vec(&(&fr_ - &pc.f)) / max_abs_vec(&pc.f).max(1.0);
            let e = eb.max(ef);
            res.split_recomposition = res.split_recomposition.max(e);
            if e > opts.tol_split {
                violations.push(Violation::at("split_recomposition", s, e, "split does not recompose B1/F".into()));
            }
            let pf2 = max_abs_vec(&(&p * &parts.f2));
            res.pf2 = res.pf2.max(pf2);
            if pf2 > opts.tol_symmetry {
                violations.push(Violation::at("pf2", s, pf2, "P F2 != 0".into()));
            }
        }

        let pv = vn(&(&p * &s.v));
        let q = pv / r;
        let nv = vn(&s.v);
        if nv > 0.0 {
            lambda[0] = lambda[0].max(vn(&(&p * &parts.f1)) / nv);
        }
        if q >= 0.25 {
            lambda[1] = lambda[1].max(vn(&(&pp * &parts.f1)) / pv);
            lambda[2] = lambda[2].max(r * vn(&(&pp * &parts.f2)) / (pv * pv));
        }
        alpha = alpha.max(opn(&(&p * &parts.b[1] * &pp))).max(opn(&(&pp * &parts.b[1] * &p)));

        // Div B with a random gradient argument in the same ball.
        let mut w = DVector::from_fn(n, |_, _| wrng.random::<f64>() - 0.5);
        let wn = vn(&w);
        if wn > 0.0 {
            w *= opts.samples.radius_fraction * r * wrng.random::<f64>() / wn;
        }
        let d = div_b(system, s.t, s.x, &s.v, &w)?;
        res.div_b_fd_error = res.div_b_fd_error.max(d.error_estimate);
        let m = &d.matrix;
        let at = s.t.abs();
        blocks[0].push((at, opn(&(&p * m * &p)), q));
        blocks[1].push((at, opn(&(&p * m * &pp)), q));
        blocks[2].push((at, opn(&(&pp * m * &p)), q));
        blocks[3].push((at, opn(&(&pp * m * &pp)), q));

        let (b, bt) = b_gradient_terms(system, s.t, s.x)?;
        for i in 0..2 {
            b_terms[i] = b_terms[i].max(b[i]);
            bt_terms[i] = bt_terms[i].max(bt[i]);
        }
    }

    let one = |_q: f64| 1.0;
    let lin = |q: f64| q;
    let quad = |q: f64| q * q;
    let (b0_, b1_, th0) = cascade(&blocks[0], one, one, t_cut);
    let (b2_, b3_, th1) = cascade(&blocks[1], one, lin, t_cut);
    let (b4_, b5_, th2) = cascade(&blocks[2], one, lin, t_cut);
    let (b6_, b7_, th3) = cascade(&blocks[3], lin, quad, t_cut);

    let constants = StructuralConstants {
        kappa: bounds.kappa,
        gamma1: bounds.gamma1,
        gamma2: bounds.gamma2,
        kappa_tilde: bounds.kappa_tilde,
        gamma1_tilde: bounds.gamma1_tilde,
        lambda,
        alpha,
        beta: [b0_, b1_, b2_, b3_, b4_, b5_, b6_, b7_],
        theta: th0.max(th1).max(th2).max(th3),
        b_const: b_terms[0] + b_terms[1],
        b_tilde: bt_terms[0] + bt_terms[1],
        sigma_loss: opts.sigma_loss,
        k_reg: opts.k_reg,
        p_exponent: pexp,
    };
    for msg in constants.ordering_violations() {
        violations.push(Violation { kind: "ordering".into(), detail: msg, t: None, x: None, value: 0.0 });
    }
    Ok((constants, violations, res))
}

/// The two terms of 𝚋 and of 𝚋̃ at one `(t, x)`, built from the `v = 0`
/// coefficients B̃⁰, 𝓑̃ and B̃₂.
fn b_gradient_terms(system: &FuchsianSystem, t: f64, x: f64) -> Result<([f64; 2], [f64; 2]), CoreError> {
    let Some(split) = &system.split else {
        return Ok(([0.0; 2], [0.0; 2]));
    };
    let n = system.fiber_dim();
    let zero = DVector::zeros(n);
    let b2 = split.parts(t, x, &zero).b[2].clone();
    if max_abs(&b2) == 0.0 {
        return Ok(([0.0; 2], [0.0; 2]));
    }
    let c = &system.coeffs;
    let p = system.proj.p();
    let fr = frame(system)?;
    let opn = |m: &DMatrix<f64>| op_norm(&fr.to_frame(m));
    let bc_inv = |xx: f64| {
        c.bc(t, xx, &zero)
            .try_inverse()
            .ok_or_else(|| CoreError::Parameter(format!("Bc(v=0) is singular at t={t}, x={xx}")))
    };
    // Evaluate once to surface a singular 𝓑̃ as an error.
    bc_inv(x)?;
    let bc = c.bc(t, x, &zero);
    let b0 = c.b0(t, x, &zero);
    let b0_inv = b0.clone().try_inverse().ok_or(CoreError::SingularB0 { t, x })?;
    let hx = space_step(x);
    let dx = |f: &dyn Fn(f64) -> DMatrix<f64>| central_derivative(f, x, hx).value;

    let d1 = dx(&|xx| bc_inv(xx).expect("checked") * c.b0(t, xx, &zero));
    let d2 = dx(&|xx| bc_inv(xx).expect("checked") * split.parts(t, xx, &zero).b[2].clone());
    let d1t = dx(&|xx| bc_inv(xx).expect("checked") * p * c.b0(t, xx, &zero) * p);

    let pb2p = p * &b2 * p;
    let term1 = opn(&(p * &bc * &d1 * &b0_inv * &pb2p));
    let term2 = opn(&(p * &bc * &d2 * p));
    let term1t = opn(&(p * &bc * &d1t * p * &b0_inv * &b2 * p));
    Ok(([term1, term2], [term1t, term2]))
}

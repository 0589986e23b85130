//! Core model of a Fuchsian symmetric hyperbolic system
//!
//! ```text
//! B⁰(t,x,u) ∂ₜu + B¹(t,x,u) ∂ₓu = (1/t) 𝓑(t,x,u) ℙ u + F(t,x,u),   t < 0,
//! ```
//!
//! on a flat periodic interval, together with numerical auditors for the
//! structural hypotheses (symmetry, coercivity, singular splits, the
//! divergence `Div B`) and the bookkeeping that turns measured constants into
//! predicted decay rates.

pub mod checks;
pub mod constants;
pub mod diff;
pub mod error;
pub mod linalg;
pub mod projection;
pub mod stats;
pub mod system;

pub use checks::{
    audit_system, check_pointwise_bounds, estimate_constants, AuditOptions, PointwiseBounds,
    StructuralReport, Violation,
};
pub use constants::{
    decay_rate_table, kappa_gate, transform_constants, zeta, DecayPrediction, GateResult,
    ImprovedFlags, Regime, StructuralConstants,
};
pub use diff::{div_b, DivB};
pub use error::CoreError;
pub use projection::{check_projection, ProjectionPair, ProjectionReport};
pub use system::{
    Coefficients, ConstantCoefficients, FuchsianSystem, PointCoeffs, Sample, SampleSpec, SingularSplit,
    SplitParts,
};

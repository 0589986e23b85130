use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::CoreError;
use crate::projection::ProjectionPair;

/// All coefficients of the system at one point `(t, x, v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCoeffs {
    pub b0: DMatrix<f64>,
    pub b1: DMatrix<f64>,
    pub bc: DMatrix<f64>,
    pub f: DVector<f64>,
}

/// Pointwise coefficient evaluators of a Fuchsian system.
///
/// Implementations must be pure: the same arguments always give the same
/// result, and concurrent calls are allowed.
pub trait Coefficients: Send + Sync {
    fn dim(&self) -> usize;
    fn b0(&self, t: f64, x: f64, v: &DVector<f64>) -> DMatrix<f64>;
    fn b1(&self, t: f64, x: f64, v: &DVector<f64>) -> DMatrix<f64>;
    fn bc(&self, t: f64, x: f64, v: &DVector<f64>) -> DMatrix<f64>;
    fn f(&self, t: f64, x: f64, v: &DVector<f64>) -> DVector<f64>;

    /// Evaluates everything at once. Override when the four evaluators share
    /// expensive intermediate quantities.
    fn eval(&self, t: f64, x: f64, v: &DVector<f64>) -> PointCoeffs {
        PointCoeffs {
            b0: self.b0(t, x, v),
            b1: self.b1(t, x, v),
            bc: self.bc(t, x, v),
            f: self.f(t, x, v),
        }
    }
}

/// The singular expansion of `B¹` and `F` at one point.
///
/// With exponent `p` the parts recompose as
///
/// ```text
/// B¹ = |t|^{-(1-p)} B₀ + |t|^{-(1-p/2)} B₁ + |t|^{-1} B₂
/// F  = |t|^{-(1-p)} (F̃ + F₀) + |t|^{-(1-p/2)} F₁ + |t|^{-1} F₂
/// ```
///
/// which for `p = 1` is the plain `B₀ + |t|^{-1/2}B₁ + |t|^{-1}B₂` form.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitParts {
    pub b: [DMatrix<f64>; 3],
    pub f_tilde: DVector<f64>,
    pub f0: DVector<f64>,
    pub f1: DVector<f64>,
    pub f2: DVector<f64>,
}

impl SplitParts {
    pub fn zeros(n: usize) -> Self {
        Self {
            b: [DMatrix::zeros(n, n), DMatrix::zeros(n, n), DMatrix::zeros(n, n)],
            f_tilde: DVector::zeros(n),
            f0: DVector::zeros(n),
            f1: DVector::zeros(n),
            f2: DVector::zeros(n),
        }
    }

    /// Weights `(w₀, w₁, w₂)` multiplying the three orders at time `t`.
    pub fn weights(t: f64, p: f64) -> [f64; 3] {
        let s = t.abs();
        [s.powf(-(1.0 - p)), s.powf(-(1.0 - 0.5 * p)), 1.0 / s]
    }

    pub fn recompose_b1(&self, t: f64, p: f64) -> DMatrix<f64> {
        let w = Self::weights(t, p);
        &self.b[0] * w[0] + &self.b[1] * w[1] + &self.b[2] * w[2]
    }

    pub fn recompose_f(&self, t: f64, p: f64) -> DVector<f64> {
        let w = Self::weights(t, p);
        (&self.f_tilde + &self.f0) * w[0] + &self.f1 * w[1] + &self.f2 * w[2]
    }
}

/// Evaluator of the singular expansion of a system.
pub trait SingularSplit: Send + Sync {
    /// Exponent `p ∈ (0, 1]` of the time-transformed variant.
    fn p_exponent(&self) -> f64 {
        1.0
    }
    fn parts(&self, t: f64, x: f64, v: &DVector<f64>) -> SplitParts;
}

/// One admissible sample point `(t, x, v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub x: f64,
    pub v: DVector<f64>,
}

/// How structural samples are drawn: `t` log-uniform in the window,
/// `x` uniform on the period, `v` uniform in the ball of radius
/// `radius_fraction·R` (measured in the `h` norm).
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SampleSpec {
    pub count: usize,
    pub seed: u64,
    pub t_window: (f64, f64),
    pub radius_fraction: f64,
}

/// A Fuchsian system on a flat periodic interval `[x0, x0 + period)`.
#[derive(Clone)]
pub struct FuchsianSystem {
    pub name: String,
    pub proj: ProjectionPair,
    pub coeffs: Arc<dyn Coefficients>,
    pub split: Option<Arc<dyn SingularSplit>>,
    pub ball_radius: f64,
    pub inner_product: DMatrix<f64>,
    pub x0: f64,
    pub period: f64,
    /// Time window over which the structural constants are meant to hold.
    pub t_window: (f64, f64),
}

impl fmt::Debug for FuchsianSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FuchsianSystem")
            .field("name", &self.name)
            .field("fiber_dim", &self.fiber_dim())
            .field("ball_radius", &self.ball_radius)
            .field("x0", &self.x0)
            .field("period", &self.period)
            .field("t_window", &self.t_window)
            .field("has_split", &self.split.is_some())
            .finish()
    }
}

impl FuchsianSystem {
    pub fn new(
        name: impl Into<String>,
        proj: ProjectionPair,
        coeffs: Arc<dyn Coefficients>,
        ball_radius: f64,
    ) -> Result<Self, CoreError> {
        let n = coeffs.dim();
        if proj.dim() != n {
            return Err(CoreError::Shape(format!(
                "projector dimension {} does not match fiber dimension {}",
                proj.dim(),
                n
            )));
        }
        if ball_radius.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            return Err(CoreError::Parameter(format!("ball radius must be positive, got {ball_radius}")));
        }
        Ok(Self {
            name: name.into(),
            proj,
            coeffs,
            split: None,
            ball_radius,
            inner_product: DMatrix::identity(n, n),
            x0: 0.0,
            period: 2.0 * std::f64::consts::PI,
            t_window: (-1.0, -1e-6),
        })
    }

    pub fn with_split(mut self, split: Arc<dyn SingularSplit>) -> Self {
        self.split = Some(split);
        self
    }

    pub fn with_inner_product(mut self, h: DMatrix<f64>) -> Result<Self, CoreError> {
        let n = self.fiber_dim();
        if h.nrows() != n || h.ncols() != n {
            return Err(CoreError::Shape(format!("inner product must be {n}x{n}")));
        }
        self.inner_product = h;
        Ok(self)
    }

    pub fn with_domain(mut self, x0: f64, period: f64) -> Self {
        self.x0 = x0;
        self.period = period;
        self
    }

    pub fn with_t_window(mut self, t_min: f64, t_max: f64) -> Self {
        self.t_window = (t_min, t_max);
        self
    }

    pub fn fiber_dim(&self) -> usize {
        self.coeffs.dim()
    }

    pub fn p_exponent(&self) -> f64 {
        self.split.as_ref().map_or(1.0, |s| s.p_exponent())
    }

    /// `h`-norm of a fiber vector.
    pub fn norm_h(&self, v: &DVector<f64>) -> f64 {
        v.dot(&(&self.inner_product * v)).max(0.0).sqrt()
    }

    /// Default sample specification over the system's own time window.
    pub fn default_samples(&self, count: usize, seed: u64) -> SampleSpec {
        SampleSpec { count, seed, t_window: self.t_window, radius_fraction: 0.95 }
    }

    /// Draws the admissible samples described by `spec`.
    pub fn samples(&self, spec: &SampleSpec) -> Result<Vec<Sample>, CoreError> {
        let (ta, tb) = spec.t_window;
        if !(ta < tb && tb < 0.0) {
            return Err(CoreError::Domain(format!("time window ({ta}, {tb}) must satisfy t_min < t_max < 0")));
        }
        let n = self.fiber_dim();
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let (la, lb) = ((-ta).ln(), (-tb).ln());
        let radius = spec.radius_fraction * self.ball_radius;
        let mut out = Vec::with_capacity(spec.count);
        for _ in 0..spec.count {
            let t = -(la + (lb - la) * rng.random::<f64>()).exp();
            let x = self.x0 + self.period * rng.random::<f64>();
            let mut v = DVector::from_fn(n, |_, _| gaussian(&mut rng));
            let norm = self.norm_h(&v);
            let r = radius * rng.random::<f64>().powf(1.0 / n as f64);
            if norm > 0.0 {
                v *= r / norm;
            }
            out.push(Sample { t, x, v });
        }
        Ok(out)
    }
}

fn gaussian(rng: &mut impl Rng) -> f64 {
    // Box–Muller; one draw per call keeps the stream simple to reason about.
    let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Constant-coefficient evaluator, handy for fixtures and tests.
#[derive(Debug, Clone)]
pub struct ConstantCoefficients {
    pub b0: DMatrix<f64>,
    pub b1: DMatrix<f64>,
    pub bc: DMatrix<f64>,
    pub f: DVector<f64>,
}

impl Coefficients for ConstantCoefficients {
    fn dim(&self) -> usize {
        self.b0.nrows()
    }
    fn b0(&self, _: f64, _: f64, _: &DVector<f64>) -> DMatrix<f64> {
        self.b0.clone()
    }
    fn b1(&self, _: f64, _: f64, _: &DVector<f64>) -> DMatrix<f64> {
        self.b1.clone()
    }
    fn bc(&self, _: f64, _: f64, _: &DVector<f64>) -> DMatrix<f64> {
        self.bc.clone()
    }
    fn f(&self, _: f64, _: f64, _: &DVector<f64>) -> DVector<f64> {
        self.f.clone()
    }
}

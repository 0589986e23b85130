use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::CoreError;
use crate::linalg::max_abs;

/// A constant symmetric projector ℙ and its complement ℙ⊥ = I − ℙ.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionPair {
    p: DMatrix<f64>,
    perp: DMatrix<f64>,
}

impl ProjectionPair {
    /// Builds the pair; the matrix must be square. Projector properties are
    /// not enforced here, see [`check_projection`].
    pub fn new(p: DMatrix<f64>) -> Result<Self, CoreError> {
        if !p.is_square() || p.nrows() == 0 {
            return Err(CoreError::Shape(format!(
                "projector must be a non-empty square matrix, got {}x{}",
                p.nrows(),
                p.ncols()
            )));
        }
        let perp = DMatrix::identity(p.nrows(), p.ncols()) - &p;
        Ok(Self { p, perp })
    }

    /// Diagonal projector selecting the components flagged `true`.
    pub fn diagonal(mask: &[bool]) -> Self {
        let n = mask.len();
        let p = DMatrix::from_fn(n, n, |i, j| if i == j && mask[i] { 1.0 } else { 0.0 });
        Self::new(p).expect("non-empty mask")
    }

    pub fn identity(n: usize) -> Self {
        Self::new(DMatrix::identity(n, n)).expect("n > 0")
    }

    pub fn dim(&self) -> usize {
        self.p.nrows()
    }

    pub fn p(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn perp(&self) -> &DMatrix<f64> {
        &self.perp
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ProjectionReport {
    pub pass: bool,
    pub idempotency_residual: f64,
    pub symmetry_residual: f64,
}

/// Checks ℙ² = ℙ and ℙᵀ = ℙ in the max norm.
pub fn check_projection(p: &DMatrix<f64>, tol: f64) -> Result<ProjectionReport, CoreError> {
    if !p.is_square() || p.nrows() == 0 {
        return Err(CoreError::Shape(format!(
            "projector must be a non-empty square matrix, got {}x{}",
            p.nrows(),
            p.ncols()
        )));
    }
    let idempotency_residual = max_abs(&(p * p - p));
    let symmetry_residual = max_abs(&(p.transpose() - p));
    Ok(ProjectionReport {
        pass: idempotency_residual <= tol && symmetry_residual <= tol,
        idempotency_residual,
        symmetry_residual,
    })
}

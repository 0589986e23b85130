//! Coefficients `q^K_{IJ}(u)` of the quadratic derivative nonlinearity.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::WaveError;

type QFn = dyn Fn(&[f64]) -> Vec<DMatrix<f64>> + Send + Sync;

#[derive(Clone)]
enum Kind {
    Constant(Vec<DMatrix<f64>>),
    Callback(Arc<QFn>),
}

/// `q^K_{IJ}` for `K, I, J = 1..N`, symmetric in `(I, J)`. Evaluation returns
/// one `N × N` matrix per `K`.
#[derive(Clone)]
pub struct Nonlinearity {
    n: usize,
    kind: Kind,
}

impl fmt::Debug for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            Kind::Constant(q) => f.debug_struct("Nonlinearity").field("n", &self.n).field("constant", q).finish(),
            Kind::Callback(_) => f.debug_struct("Nonlinearity").field("n", &self.n).field("callback", &true).finish(),
        }
    }
}

fn check_symmetric(q: &[DMatrix<f64>], n: usize) -> Result<(), WaveError> {
    if q.len() != n || q.iter().any(|m| m.nrows() != n || m.ncols() != n) {
        return Err(WaveError::Parameter(format!("q must consist of {n} matrices of size {n}x{n}")));
    }
    for (k, m) in q.iter().enumerate() {
        for i in 0..n {
            for j in 0..i {
                let gap = (m[(i, j)] - m[(j, i)]).abs();
                if gap > 1e-12 * (1.0 + m[(i, j)].abs()) {
                    return Err(WaveError::Asymmetric { k, i, j, gap });
                }
            }
        }
    }
    Ok(())
}

impl Nonlinearity {
    pub fn zero(n: usize) -> Self {
        Self { n, kind: Kind::Constant(vec![DMatrix::zeros(n, n); n]) }
    }

    /// Constant coefficients indexed `[K][I][J]`.
    pub fn constant(coeffs: &[Vec<Vec<f64>>]) -> Result<Self, WaveError> {
        let n = coeffs.len();
        if n == 0 {
            return Err(WaveError::Parameter("q needs at least one field".into()));
        }
        let mut mats = Vec::with_capacity(n);
        for rows in coeffs {
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(WaveError::Parameter(format!("q must have shape {n}x{n}x{n}")));
            }
            mats.push(DMatrix::from_fn(n, n, |i, j| rows[i][j]));
        }
        check_symmetric(&mats, n)?;
        Ok(Self { n, kind: Kind::Constant(mats) })
    }

    /// Scalar equation with `q¹₁₁ = q`.
    pub fn scalar(q: f64) -> Self {
        Self { n: 1, kind: Kind::Constant(vec![DMatrix::from_element(1, 1, q)]) }
    }

    /// Smooth `u`-dependent coefficients. Symmetry is checked on a few
    /// probe states on registration.
    pub fn from_fn(
        n: usize,
        f: impl Fn(&[f64]) -> Vec<DMatrix<f64>> + Send + Sync + 'static,
    ) -> Result<Self, WaveError> {
        for probe in [0.0, 0.3, -0.7, 1.1] {
            let u: Vec<f64> = (0..n).map(|i| probe * (1.0 + i as f64) / n as f64).collect();
            check_symmetric(&f(&u), n)?;
        }
        Ok(Self { n, kind: Kind::Callback(Arc::new(f)) })
    }

    pub fn n_fields(&self) -> usize {
        self.n
    }

    pub fn eval(&self, u: &[f64]) -> Vec<DMatrix<f64>> {
        match &self.kind {
            Kind::Constant(q) => q.clone(),
            Kind::Callback(f) => f(u),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(&self.kind, Kind::Constant(q) if q.iter().all(|m| m.iter().all(|&x| x == 0.0)))
    }
}

/// Constant coefficients as they appear in configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QSpec {
    /// `coefficients[K][I][J]`.
    pub coefficients: Vec<Vec<Vec<f64>>>,
}

impl QSpec {
    pub fn scalar(q: f64) -> Self {
        Self { coefficients: vec![vec![vec![q]]] }
    }

    pub fn build(&self) -> Result<Nonlinearity, WaveError> {
        Nonlinearity::constant(&self.coefficients)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn asymmetric_coefficients_are_rejected() {
        let q = vec![vec![vec![0.0, 1.0], vec![0.5, 0.0]], vec![vec![0.0; 2]; 2]];
        assert!(matches!(Nonlinearity::constant(&q), Err(WaveError::Asymmetric { k: 0, i: 1, j: 0, .. })));
        let bad = Nonlinearity::from_fn(2, |u| vec![DMatrix::from_row_slice(2, 2, &[0.0, u[0], 0.0, 0.0]); 2]);
        assert!(bad.is_err());
    }

    #[test]
    fn shapes_are_checked() {
        assert!(Nonlinearity::constant(&[vec![vec![1.0, 2.0]]]).is_err());
        assert!(Nonlinearity::constant(&[]).is_err());
    }

    #[test]
    fn evaluation() {
        let q = Nonlinearity::scalar(2.0);
        assert_eq!(q.eval(&[0.4])[0][(0, 0)], 2.0);
        assert!(!q.is_zero());
        assert!(Nonlinearity::zero(3).is_zero());
        let f = Nonlinearity::from_fn(1, |u| vec![DMatrix::from_element(1, 1, u[0].cos())]).unwrap();
        assert_eq!(f.eval(&[0.0])[0][(0, 0)], 1.0);
        let spec: QSpec = serde_json::from_str(r#"{"coefficients": [[[1.0]]]}"#).unwrap();
        assert_eq!(spec, QSpec::scalar(1.0));
        assert!(serde_json::from_str::<QSpec>(r#"{"coefficients": [[[1.0]]], "x": 1}"#).is_err());
    }
}

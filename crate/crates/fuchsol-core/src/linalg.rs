//! Small dense linear-algebra helpers shared by the auditors.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Symmetric part `(A + Aᵀ)/2`.
pub fn sym(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

/// Largest absolute entry.
pub fn max_abs(a: &DMatrix<f64>) -> f64 {
    a.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

pub fn max_abs_vec(a: &DVector<f64>) -> f64 {
    a.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Eigenvalues of the symmetric part of `a`, ascending.
pub fn sym_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(sym(a)).eigenvalues.iter().copied().collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    ev
}

pub fn min_eig_sym(a: &DMatrix<f64>) -> f64 {
    sym_eigenvalues(a).first().copied().unwrap_or(f64::NAN)
}

pub fn max_eig_sym(a: &DMatrix<f64>) -> f64 {
    sym_eigenvalues(a).last().copied().unwrap_or(f64::NAN)
}

/// Spectral norm (largest singular value).
pub fn op_norm(a: &DMatrix<f64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.singular_values().iter().fold(0.0_f64, |m, x| m.max(*x))
}

/// `f(A)` for a symmetric matrix through its eigendecomposition.
pub fn sym_fn(a: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let e = SymmetricEigen::new(sym(a));
    let d = DMatrix::from_diagonal(&e.eigenvalues.map(f));
    &e.eigenvectors * d * e.eigenvectors.transpose()
}

/// Inverse square root of a symmetric positive definite matrix, `None` if
/// the matrix is not positive definite.
pub fn spd_inv_sqrt(a: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    if min_eig_sym(a) <= 0.0 {
        return None;
    }
    Some(sym_fn(a, |x| 1.0 / x.sqrt()))
}

/// Orthonormal basis (as columns) of the range of a symmetric projector.
pub fn range_basis(p: &DMatrix<f64>) -> DMatrix<f64> {
    let e = SymmetricEigen::new(sym(p));
    let cols: Vec<DVector<f64>> = (0..p.nrows())
        .filter(|&i| e.eigenvalues[i] > 0.5)
        .map(|i| e.eigenvectors.column(i).into_owned())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(p.nrows(), 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Change of frame that turns `h`-symmetry into ordinary symmetry:
/// `Â = h^{1/2} A h^{-1/2}`.
#[derive(Debug, Clone)]
pub struct HFrame {
    sqrt: DMatrix<f64>,
    inv_sqrt: DMatrix<f64>,
}

impl HFrame {
    pub fn new(h: &DMatrix<f64>) -> Option<Self> {
        let inv_sqrt = spd_inv_sqrt(h)?;
        let sqrt = sym_fn(h, f64::sqrt);
        Some(Self { sqrt, inv_sqrt })
    }

    pub fn to_frame(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        &self.sqrt * a * &self.inv_sqrt
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_extremes_of_diagonal() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, -1.0, 2.0]));
        assert_eq!(min_eig_sym(&a), -1.0);
        assert_eq!(max_eig_sym(&a), 3.0);
        assert!((op_norm(&a) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn inverse_square_root_squares_to_inverse() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let s = spd_inv_sqrt(&a).unwrap();
        let prod = &s * &s * &a;
        assert!((prod - DMatrix::identity(2, 2)).amax() < 1e-13);
        assert!(spd_inv_sqrt(&(-a)).is_none());
    }

    #[test]
    fn range_basis_of_coordinate_projector() {
        let p = DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 1.0, 1.0]));
        let b = range_basis(&p);
        assert_eq!(b.ncols(), 2);
        assert!((&b.transpose() * &b - DMatrix::identity(2, 2)).amax() < 1e-13);
    }

    #[test]
    fn frame_symmetrises_h_symmetric_matrix() {
        let h = DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 1.0]));
        // hA symmetric: A = h⁻¹ S with S symmetric.
        let s = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 5.0]);
        let a = h.clone().try_inverse().unwrap() * s;
        let frame = HFrame::new(&h).unwrap();
        let ah = frame.to_frame(&a);
        assert!((&ah - ah.transpose()).amax() < 1e-14);
    }
}

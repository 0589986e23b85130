use nalgebra::DMatrix;

use crate::field::Field;
use crate::stencil::derivative_into;

/// Order of the stencil used inside every discrete Sobolev norm.
pub const NORM_STENCIL: usize = 4;

fn weighted_sq(values: &[f64], dim: usize, h_ip: Option<&DMatrix<f64>>) -> f64 {
    match h_ip {
        None => values.iter().map(|v| v * v).sum(),
        Some(h) => values
            .chunks(dim)
            .map(|u| {
                let mut s = 0.0;
                for a in 0..dim {
                    for b in 0..dim {
                        s += u[a] * h[(a, b)] * u[b];
                    }
                }
                s
            })
            .sum(),
    }
}

/// Squared norms `h·Σ_j |D^ℓ u_j|²` for `ℓ = 0..=k`.
pub fn sobolev_parts(field: &Field, k: usize, h_ip: Option<&DMatrix<f64>>) -> Vec<f64> {
    let n = field.n_points();
    let dx = field.grid.spacing();
    let mut cur = field.values.clone();
    let mut next = vec![0.0; cur.len()];
    let mut out = Vec::with_capacity(k + 1);
    for l in 0..=k {
        if l > 0 {
            derivative_into(&cur, field.dim, n, dx, NORM_STENCIL, &mut next).expect("grid has at least 8 points");
            std::mem::swap(&mut cur, &mut next);
        }
        out.push(dx * weighted_sq(&cur, field.dim, h_ip));
    }
    out
}

/// Discrete `H^k` norm: `sqrt(Σ_{ℓ≤k} h·Σ_j |D^ℓ u_j|²_h)` with `D` the
/// fourth-order stencil. `h_ip = None` means the Euclidean fiber product.
pub fn sobolev_norm(field: &Field, k: usize, h_ip: Option<&DMatrix<f64>>) -> f64 {
    sobolev_parts(field, k, h_ip).iter().sum::<f64>().sqrt()
}

/// Every `H^ℓ` norm for `ℓ = 0..=k` in one pass.
pub fn sobolev_norms_upto(field: &Field, k: usize, h_ip: Option<&DMatrix<f64>>) -> Vec<f64> {
    let parts = sobolev_parts(field, k, h_ip);
    let mut acc = 0.0;
    parts
        .iter()
        .map(|p| {
            acc += p;
            acc.sqrt()
        })
        .collect()
}

/// `H^k` norm of `M·u` for a fixed fiber map `M` (typically ℙ or ℙ⊥).
pub fn projected_sobolev_norm(field: &Field, m: &DMatrix<f64>, k: usize, h_ip: Option<&DMatrix<f64>>) -> f64 {
    sobolev_norm(&field.map_fibers(m), k, h_ip)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PeriodicGrid;
    use std::f64::consts::PI;

    #[test]
    fn constant_field_l2() {
        let g = PeriodicGrid::new(32, 2.0 * PI).unwrap();
        let f = Field::from_fn(g, 1, -1.0, |_| vec![-1.5]);
        assert!((sobolev_norm(&f, 0, None) - 1.5 * (2.0 * PI).sqrt()).abs() < 1e-13);
    }

    #[test]
    fn sine_h1() {
        let g = PeriodicGrid::new(256, 2.0 * PI).unwrap();
        let f = Field::from_fn(g, 1, -1.0, |x| vec![x.sin()]);
        assert!((sobolev_norm(&f, 1, None) - (2.0 * PI).sqrt()).abs() < 1e-4);
    }

    #[test]
    fn zero_field() {
        let g = PeriodicGrid::new(16, 1.0).unwrap();
        assert_eq!(sobolev_norm(&Field::zeros(g, 3, -1.0), 3, None), 0.0);
    }

    #[test]
    fn weighted_fiber_product() {
        let g = PeriodicGrid::new(16, 1.0).unwrap();
        let f = Field::from_fn(g, 2, -1.0, |_| vec![1.0, 1.0]);
        let h = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![4.0, 0.0]));
        assert!((sobolev_norm(&f, 0, Some(&h)) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn cumulative_norms_match_single_calls() {
        let g = PeriodicGrid::new(32, 2.0 * PI).unwrap();
        let f = Field::from_fn(g, 1, -1.0, |x| vec![(2.0 * x).cos() + 0.3]);
        let all = sobolev_norms_upto(&f, 3, None);
        for (k, v) in all.iter().enumerate() {
            assert!((v - sobolev_norm(&f, k, None)).abs() < 1e-12);
        }
    }
}

//! Periodic centred first-derivative stencils.

use crate::error::NumericsError;
use crate::field::Field;

/// One-sided weights `c_1..c_m` of the antisymmetric centred stencil
/// `u'(x_j) ≈ (1/h) Σ c_k (u_{j+k} − u_{j−k})`.
pub fn weights(order: usize) -> Result<&'static [f64], NumericsError> {
    match order {
        2 => Ok(&[0.5]),
        4 => Ok(&[2.0 / 3.0, -1.0 / 12.0]),
        6 => Ok(&[0.75, -0.15, 1.0 / 60.0]),
        other => Err(NumericsError::UnsupportedOrder(other)),
    }
}

/// Writes the derivative of `src` (point-major, `dim` components, `n` points)
/// into `dst`.
pub fn derivative_into(src: &[f64], dim: usize, n: usize, h: f64, order: usize, dst: &mut [f64]) -> Result<(), NumericsError> {
    let w = weights(order)?;
    if n <= 2 * w.len() {
        return Err(NumericsError::GridTooSmall { n, half_width: w.len() });
    }
    let inv_h = 1.0 / h;
    for j in 0..n {
        for a in 0..dim {
            let mut acc = 0.0;
            for (k, c) in w.iter().enumerate() {
                let k = k + 1;
                let jp = (j + k) % n;
                let jm = (j + n - k) % n;
                acc += c * (src[jp * dim + a] - src[jm * dim + a]);
            }
            dst[j * dim + a] = acc * inv_h;
        }
    }
    Ok(())
}

/// Periodic centred derivative of the requested order, applied per fiber
/// component.
pub fn derivative(field: &Field, order: usize) -> Result<Field, NumericsError> {
    let mut out = field.clone();
    derivative_into(&field.values, field.dim, field.n_points(), field.grid.spacing(), order, &mut out.values)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PeriodicGrid;
    use std::f64::consts::PI;

    fn sine(n: usize) -> Field {
        Field::from_fn(PeriodicGrid::new(n, 2.0 * PI).unwrap(), 1, -1.0, |x| vec![x.sin()])
    }

    #[test]
    fn fourth_order_sine() {
        let f = sine(64);
        let d = derivative(&f, 4).unwrap();
        let err = (0..64).map(|j| (d.values[j] - f.grid.x(j).cos()).abs()).fold(0.0, f64::max);
        assert!(err <= 1e-5, "err = {err}");
    }

    #[test]
    fn observed_orders() {
        for (order, expect) in [(2, 2.0), (4, 4.0), (6, 6.0)] {
            let e = |n: usize| {
                let f = sine(n);
                let d = derivative(&f, order).unwrap();
                (0..n).map(|j| (d.values[j] - f.grid.x(j).cos()).abs()).fold(0.0, f64::max)
            };
            let rate = (e(32) / e(64)).log2();
            assert!((rate - expect).abs() < 0.1, "order {order}: rate {rate}");
        }
    }

    #[test]
    fn constant_and_linearity() {
        let g = PeriodicGrid::new(32, 3.0).unwrap();
        let c = Field::from_fn(g, 2, -1.0, |_| vec![2.5, -1.0]);
        assert!(derivative(&c, 6).unwrap().max_abs() == 0.0);
        let u = Field::from_fn(g, 2, -1.0, |x| vec![(2.0 * x).sin(), x.cos()]);
        let v = Field::from_fn(g, 2, -1.0, |x| vec![x.cos().powi(2), (3.0 * x).sin()]);
        let lhs = derivative(&u.scaled(2.0).axpy(-3.0, &v).unwrap(), 4).unwrap();
        let rhs = derivative(&u, 4).unwrap().scaled(2.0).axpy(-3.0, &derivative(&v, 4).unwrap()).unwrap();
        assert!(lhs.axpy(-1.0, &rhs).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn unsupported_order() {
        assert!(matches!(derivative(&sine(16), 3), Err(NumericsError::UnsupportedOrder(3))));
    }
}

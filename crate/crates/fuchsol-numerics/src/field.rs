use nalgebra::DVector;
use serde::Serialize;

use crate::error::NumericsError;

/// Uniform periodic grid `x_j = origin + j·h`, `j = 0..n_points`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeriodicGrid {
    pub n_points: usize,
    pub length: f64,
    pub origin: f64,
}

impl PeriodicGrid {
    pub fn new(n_points: usize, length: f64) -> Result<Self, NumericsError> {
        Self::with_origin(n_points, length, 0.0)
    }

    pub fn with_origin(n_points: usize, length: f64, origin: f64) -> Result<Self, NumericsError> {
        if n_points < 8 {
            return Err(NumericsError::InvalidGrid(format!("need at least 8 points, got {n_points}")));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(NumericsError::InvalidGrid(format!("length must be positive, got {length}")));
        }
        Ok(Self { n_points, length, origin })
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n_points as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        self.origin + j as f64 * self.spacing()
    }

    /// Index `j + offset` wrapped onto `0..n_points`.
    pub fn wrap(&self, j: usize, offset: isize) -> usize {
        let n = self.n_points as isize;
        (j as isize + offset).rem_euclid(n) as usize
    }
}

/// A discrete state `u(t, ·)` with `dim` components per grid point, stored
/// point-major: component `a` at point `j` lives at `values[j·dim + a]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub grid: PeriodicGrid,
    pub dim: usize,
    pub values: Vec<f64>,
    pub time: f64,
}

impl Field {
    pub fn zeros(grid: PeriodicGrid, dim: usize, time: f64) -> Self {
        Self { grid, dim, values: vec![0.0; grid.n_points * dim], time }
    }

    /// Samples `f(x)` (which must return `dim` components) on the grid.
    pub fn from_fn(grid: PeriodicGrid, dim: usize, time: f64, f: impl Fn(f64) -> Vec<f64>) -> Self {
        let mut out = Self::zeros(grid, dim, time);
        for j in 0..grid.n_points {
            let v = f(grid.x(j));
            assert_eq!(v.len(), dim, "profile returned {} components, expected {dim}", v.len());
            out.values[j * dim..(j + 1) * dim].copy_from_slice(&v);
        }
        out
    }

    pub fn n_points(&self) -> usize {
        self.grid.n_points
    }

    pub fn point(&self, j: usize) -> &[f64] {
        &self.values[j * self.dim..(j + 1) * self.dim]
    }

    pub fn point_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.values[j * self.dim..(j + 1) * self.dim]
    }

    pub fn point_vec(&self, j: usize) -> DVector<f64> {
        DVector::from_column_slice(self.point(j))
    }

    /// Component `a` as a plain series over the grid.
    pub fn component(&self, a: usize) -> Vec<f64> {
        (0..self.n_points()).map(|j| self.values[j * self.dim + a]).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    fn check_compatible(&self, other: &Field) -> Result<(), NumericsError> {
        if self.grid != other.grid || self.dim != other.dim {
            return Err(NumericsError::Shape("fields live on different grids or fibers".into()));
        }
        Ok(())
    }

    /// `self + s·other`, keeping `self.time`.
    pub fn axpy(&self, s: f64, other: &Field) -> Result<Field, NumericsError> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (o, b) in out.values.iter_mut().zip(&other.values) {
            *o += s * b;
        }
        Ok(out)
    }

    pub fn scaled(&self, s: f64) -> Field {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// Applies a fixed linear map to every fiber.
    pub fn map_fibers(&self, m: &nalgebra::DMatrix<f64>) -> Field {
        let mut out = self.clone();
        for j in 0..self.n_points() {
            let r = m * self.point_vec(j);
            out.point_mut(j).copy_from_slice(r.as_slice());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_wraps_exactly() {
        let g = PeriodicGrid::new(16, 2.0).unwrap();
        assert_eq!(g.wrap(0, -1), 15);
        assert_eq!(g.wrap(15, 3), 2);
        assert_eq!(g.spacing() * 16.0, 2.0);
    }

    #[test]
    fn tiny_grids_rejected() {
        assert!(PeriodicGrid::new(4, 1.0).is_err());
        assert!(PeriodicGrid::new(16, 0.0).is_err());
    }

    #[test]
    fn point_major_layout() {
        let g = PeriodicGrid::new(8, 8.0).unwrap();
        let f = Field::from_fn(g, 2, -1.0, |x| vec![x, -x]);
        assert_eq!(f.point(3), &[3.0, -3.0]);
        assert_eq!(f.component(1)[5], -5.0);
    }

    #[test]
    fn axpy_checks_shapes() {
        let g = PeriodicGrid::new(8, 1.0).unwrap();
        let a = Field::zeros(g, 2, -1.0);
        let b = Field::zeros(g, 3, -1.0);
        assert!(a.axpy(1.0, &b).is_err());
    }
}

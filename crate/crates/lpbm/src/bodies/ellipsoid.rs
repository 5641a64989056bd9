use std::f64::consts::PI;

use crate::error::{check_dim, Error, Result};
use crate::{M3, V3};

/// The body `A·Bⁿ`. Planar matrices are embedded as `diag(A, 1)`.
#[derive(Debug, Clone)]
pub struct Ellipsoid {
    pub dim: usize,
    a: M3,
    a_inv: M3,
    det: f64,
}

impl Ellipsoid {
    pub fn new(dim: usize, a: M3) -> Result<Self> {
        check_dim(dim)?;
        let mut a = a;
        if dim == 2 {
            for i in 0..2 {
                a[(i, 2)] = 0.0;
                a[(2, i)] = 0.0;
            }
            a[(2, 2)] = 1.0;
        }
        let det = a.determinant();
        if !(det.abs() > 1e-12) || !det.is_finite() {
            return Err(Error::Validation(format!("ellipsoid matrix singular (det {det:e})")));
        }
        let a_inv = a.try_inverse().ok_or_else(|| Error::Validation("singular matrix".into()))?;
        Ok(Self { dim, a, a_inv, det })
    }

    /// Row-major `n×n` entries.
    pub fn from_rows(dim: usize, rows: &[f64]) -> Result<Self> {
        check_dim(dim)?;
        if rows.len() != dim * dim {
            return Err(Error::Argument(format!(
                "expected {} matrix entries, got {}",
                dim * dim,
                rows.len()
            )));
        }
        let mut a = M3::identity();
        for i in 0..dim {
            for j in 0..dim {
                a[(i, j)] = rows[i * dim + j];
            }
        }
        Self::new(dim, a)
    }

    pub fn ball(dim: usize, r: f64) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::Argument(format!("ball radius {r} must be positive")));
        }
        Self::new(dim, M3::identity() * r)
    }

    pub fn matrix(&self) -> &M3 {
        &self.a
    }

    pub fn inverse(&self) -> &M3 {
        &self.a_inv
    }

    /// Row-major entries of the `n×n` block.
    pub fn rows(&self) -> Vec<f64> {
        let n = self.dim;
        (0..n * n).map(|k| self.a[(k / n, k % n)]).collect()
    }

    pub fn abs_det(&self) -> f64 {
        self.det.abs()
    }

    pub fn support(&self, u: &V3) -> f64 {
        (self.a.transpose() * u).norm()
    }

    pub fn gauge(&self, x: &V3) -> f64 {
        (self.a_inv * x).norm()
    }

    pub fn volume(&self) -> f64 {
        let omega = if self.dim == 2 { PI } else { 4.0 * PI / 3.0 };
        self.det.abs() * omega
    }

    pub fn polar(&self) -> Result<Self> {
        Self::new(self.dim, self.a_inv.transpose())
    }

    pub fn max_semi_axis(&self) -> f64 {
        if self.dim == 2 {
            let b = nalgebra::Matrix2::new(self.a[(0, 0)], self.a[(0, 1)], self.a[(1, 0)], self.a[(1, 1)]);
            b.singular_values().max()
        } else {
            self.a.singular_values().max()
        }
    }
}

//! Plane vector fields along a curve, stored componentwise.

use crate::calculus::{PeriodicGrid, RealField};
use crate::error::Result;

pub type Mat2 = [[f64; 2]; 2];

/// A pair of real periodic fields `(x, y)` sampled on the same grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneField {
    pub x: RealField,
    pub y: RealField,
}

impl PlaneField {
    pub fn new(x: RealField, y: RealField) -> Result<Self> {
        x.ensure_same_grid(&y)?;
        Ok(PlaneField { x, y })
    }

    pub fn zeros(grid: &PeriodicGrid) -> Self {
        PlaneField {
            x: RealField::zeros(grid),
            y: RealField::zeros(grid),
        }
    }

    pub fn from_fn(grid: &PeriodicGrid, f: impl Fn(f64) -> (f64, f64)) -> Self {
        PlaneField {
            x: RealField::from_fn(grid, |s| f(s).0),
            y: RealField::from_fn(grid, |s| f(s).1),
        }
    }

    pub fn grid(&self) -> &PeriodicGrid {
        self.x.grid()
    }

    pub fn ds(&self) -> Self {
        PlaneField {
            x: self.x.ds(),
            y: self.y.ds(),
        }
    }

    pub fn ds_n(&self, order: u32) -> Self {
        PlaneField {
            x: self.x.ds_n(order),
            y: self.y.ds_n(order),
        }
    }

    /// Pointwise `det(self, other) = x·y' − y·x'`.
    pub fn det(&self, other: &PlaneField) -> RealField {
        &self.x * &other.y - &self.y * &other.x
    }

    pub fn dot(&self, other: &PlaneField) -> RealField {
        &self.x * &other.x + &self.y * &other.y
    }

    /// Pointwise product with a scalar field.
    pub fn scale_by(&self, f: &RealField) -> Self {
        PlaneField {
            x: &self.x * f,
            y: &self.y * f,
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        PlaneField {
            x: &self.x * c,
            y: &self.y * c,
        }
    }

    pub fn add(&self, other: &PlaneField) -> Self {
        PlaneField {
            x: &self.x + &other.x,
            y: &self.y + &other.y,
        }
    }

    pub fn sub(&self, other: &PlaneField) -> Self {
        PlaneField {
            x: &self.x - &other.x,
            y: &self.y - &other.y,
        }
    }

    pub fn apply_matrix(&self, a: &Mat2) -> Self {
        PlaneField {
            x: &self.x * a[0][0] + &self.y * a[0][1],
            y: &self.x * a[1][0] + &self.y * a[1][1],
        }
    }

    pub fn translate(&self, v: [f64; 2]) -> Self {
        PlaneField {
            x: self.x.add_constant(v[0]),
            y: self.y.add_constant(v[1]),
        }
    }

    /// Rotation by +π/2: `(x, y) ↦ (−y, x)`.
    pub fn rotate_left(&self) -> Self {
        PlaneField {
            x: -&self.y,
            y: self.x.clone(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.x.max_abs().max(self.y.max_abs())
    }

    pub fn max_abs_diff(&self, other: &PlaneField) -> f64 {
        self.x.max_abs_diff(&other.x).max(self.y.max_abs_diff(&other.y))
    }

    /// Pointwise Euclidean norm.
    pub fn norm(&self) -> RealField {
        self.dot(self).map(f64::sqrt)
    }
}

pub fn mat_det(a: &Mat2) -> f64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut c = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

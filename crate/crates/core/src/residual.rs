use serde::Serialize;

/// Two independently computed sides of an identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Comparison {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

impl Comparison {
    pub fn new(lhs: f64, rhs: f64) -> Self {
        Comparison {
            lhs,
            rhs,
            residual: (lhs - rhs).abs(),
        }
    }

    /// `1 + max(|lhs|, |rhs|)`.
    pub fn scale(&self) -> f64 {
        1.0 + self.lhs.abs().max(self.rhs.abs())
    }

    /// `residual ≤ tol · scale`.
    pub fn within(&self, tol: f64) -> bool {
        self.residual <= tol * self.scale()
    }
}

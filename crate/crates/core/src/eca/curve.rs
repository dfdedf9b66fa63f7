use serde::Serialize;

use crate::calculus::{PeriodicGrid, RealField};
use crate::error::{Error, Result};
use crate::plane::PlaneField;

pub const DEFAULT_DET_TOL: f64 = 1e-8;
/// Tolerance on the linearized constraint in [`tangent_extract`].
pub const DEFAULT_TANGENT_TOL: f64 = 1e-8;

/// Closed equicentroaffine curve: `det(γ, γ_s) = 1`.
///
/// Construction only checks that γ avoids the origin; use [`eca_validate`] for
/// the determinant condition.
#[derive(Debug, Clone, PartialEq)]
pub struct EcaCurve {
    gamma: PlaneField,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EcaReport {
    pub max_det_defect: f64,
    pub ok: bool,
}

impl EcaCurve {
    pub fn new(x: RealField, y: RealField) -> Result<Self> {
        Self::from_plane(PlaneField::new(x, y)?)
    }

    pub fn from_plane(gamma: PlaneField) -> Result<Self> {
        let r = gamma.norm();
        if let Some(index) = r.samples().iter().position(|&v| v == 0.0) {
            return Err(Error::CurveThroughOrigin { index });
        }
        Ok(EcaCurve { gamma })
    }

    pub fn unit_circle(grid: &PeriodicGrid) -> Self {
        EcaCurve {
            gamma: PlaneField::from_fn(grid, |s| (s.cos(), s.sin())),
        }
    }

    /// Star-shaped curve `γ = a·r(θ)(cos θ, sin θ)` reparametrized so that
    /// `det(γ, γ_s) = 1` with period 2π. `r` must be positive and 2π-periodic.
    pub fn from_polar(grid: &PeriodicGrid, r: impl Fn(f64) -> f64) -> Result<Self> {
        // s(θ) = θ + (P(θ) − P(0)) / m with P' = r² − m, m = mean(r²)
        let fine = PeriodicGrid::new(1024)?;
        let r2 = RealField::from_fn(&fine, |t| r(t).powi(2));
        let m = r2.mean();
        let p_coeffs = r2.add_constant(-m).ds_inv_centered().coefficients();
        let p = |t: f64| crate::calculus::eval_coefficients(&fine, &p_coeffs, t).re;
        let p0 = p(0.0);
        let a = (1.0 / m).sqrt();
        let mut theta = Vec::with_capacity(grid.n_points());
        for j in 0..grid.n_points() {
            let s = grid.node(j);
            let mut t = s;
            for _ in 0..50 {
                let f = t + (p(t) - p0) / m - s;
                let step = f / (r(t).powi(2) / m);
                t -= step;
                if step.abs() < 1e-15 {
                    break;
                }
            }
            theta.push(t);
        }
        let x = RealField::new(grid, theta.iter().map(|&t| a * r(t) * t.cos()).collect())?;
        let y = RealField::new(grid, theta.iter().map(|&t| a * r(t) * t.sin()).collect())?;
        Self::new(x, y)
    }

    pub fn grid(&self) -> &PeriodicGrid {
        self.gamma.grid()
    }

    pub fn x(&self) -> &RealField {
        &self.gamma.x
    }

    pub fn y(&self) -> &RealField {
        &self.gamma.y
    }

    pub fn as_plane(&self) -> &PlaneField {
        &self.gamma
    }

    /// `det(γ, γ_s) − 1` at every node.
    pub fn det_defect(&self) -> RealField {
        self.gamma.det(&self.gamma.ds()).add_constant(-1.0)
    }

    pub fn validate(&self, det_tol: f64) -> EcaReport {
        let max_det_defect = self.det_defect().max_abs();
        EcaReport {
            max_det_defect,
            ok: max_det_defect <= det_tol,
        }
    }

    /// `κ = det(γ_s, γ_ss)`.
    pub fn curvature(&self) -> RealField {
        let d1 = self.gamma.ds();
        d1.det(&d1.ds())
    }
}

pub fn eca_validate(gamma: &EcaCurve, det_tol: f64) -> EcaReport {
    gamma.validate(det_tol)
}

pub fn eca_curvature(gamma: &EcaCurve) -> RealField {
    gamma.curvature()
}

/// Tangent vector to the space of equicentroaffine curves, encoded by the
/// single function α of `γ_t = −½α_s γ + α γ_s`.
#[derive(Debug, Clone, PartialEq)]
pub struct EcaTangent {
    pub alpha: RealField,
}

impl EcaTangent {
    pub fn new(alpha: RealField) -> Self {
        EcaTangent { alpha }
    }

    pub fn grid(&self) -> &PeriodicGrid {
        self.alpha.grid()
    }
}

/// `−½α_s γ + α γ_s`.
pub fn tangent_embed(gamma: &EcaCurve, t: &EcaTangent) -> Result<PlaneField> {
    gamma.x().ensure_same_grid(&t.alpha)?;
    let g = gamma.as_plane();
    let a_s = t.alpha.ds() * -0.5;
    Ok(g.scale_by(&a_s).add(&g.ds().scale_by(&t.alpha)))
}

/// Inverse of [`tangent_embed`]: `α = det(γ, V)`, after checking the
/// linearized constraint `det(V, γ_s) + det(γ, V_s) = 0`.
pub fn tangent_extract(gamma: &EcaCurve, v: &PlaneField, tol: f64) -> Result<EcaTangent> {
    gamma.x().ensure_same_grid(&v.x)?;
    let g = gamma.as_plane();
    let constraint = v.det(&g.ds()) + g.det(&v.ds());
    let defect = constraint.max_abs();
    if defect > tol * (1.0 + v.max_abs()) {
        return Err(Error::NotTangent { defect });
    }
    Ok(EcaTangent::new(g.det(v)))
}

//! SL(2;ℝ) and S¹ actions on equicentroaffine curves.

use crate::eca::curve::{EcaCurve, EcaTangent};
use crate::error::{Error, Result};
use crate::plane::{mat_det, Mat2};

pub const GROUP_TOL: f64 = 1e-12;

/// `γ ↦ Aγ` for `A ∈ SL(2;ℝ)`.
pub fn sl2_apply(a: &Mat2, gamma: &EcaCurve) -> Result<EcaCurve> {
    let det = mat_det(a);
    if (det - 1.0).abs() > GROUP_TOL {
        return Err(Error::NotUnimodular { det });
    }
    EcaCurve::from_plane(gamma.as_plane().apply_matrix(a))
}

/// Fundamental vector field `Aγ` of `A ∈ sl(2;ℝ)`, encoded as `α = det(γ, Aγ)`.
pub fn sl2_tangent(a: &Mat2, gamma: &EcaCurve) -> Result<EcaTangent> {
    let trace = a[0][0] + a[1][1];
    if trace.abs() > GROUP_TOL {
        return Err(Error::NotTraceFree { trace });
    }
    let g = gamma.as_plane();
    Ok(EcaTangent::new(g.det(&g.apply_matrix(a))))
}

/// Reparametrization `γ ↦ γ(· + σ)`.
pub fn s1_apply(sigma: f64, gamma: &EcaCurve) -> Result<EcaCurve> {
    EcaCurve::new(gamma.x().shift(sigma), gamma.y().shift(sigma))
}

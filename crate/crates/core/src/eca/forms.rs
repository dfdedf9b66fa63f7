//! Presymplectic forms `ω_k`, Poisson brackets `{·,·}_k` and the identities
//! that relate them.

use crate::calculus::{RealField, DEFAULT_MEAN_TOL};
use crate::eca::curve::{tangent_embed, EcaCurve, EcaTangent};
use crate::eca::hierarchy::{omega_ds, omega_power, with_step};
use crate::eca::level::{check_level_tangent, LevelSetSpec};
use crate::error::{Error, Result};
use crate::plane::PlaneField;
use crate::residual::Comparison;

/// `ω₀(X, Y) = ∫ α β_s ds`.
pub fn omega0(t1: &EcaTangent, t2: &EcaTangent) -> Result<f64> {
    t1.alpha.ensure_same_grid(&t2.alpha)?;
    Ok((&t1.alpha * &t2.alpha.ds()).integrate())
}

/// `Ω^k β_s`: the first Ω acts through β itself, later powers use the
/// mean-zero antiderivative.
fn omega_k_of_ds(kappa: &RealField, beta: &RealField, k: usize) -> Result<RealField> {
    if k == 0 {
        return Ok(beta.ds());
    }
    let first = omega_ds(kappa, beta);
    if k == 1 {
        return Ok(first);
    }
    omega_power(kappa, &first, k - 1, DEFAULT_MEAN_TOL)
        .map(|p| p.value)
        .map_err(|e| match e {
            Error::NonZeroMean { mean, step } => Error::NonZeroMean {
                mean,
                step: step.map(|s| s + 1),
            },
            other => other,
        })
}

/// `ω_k(X, Y) = ∫ α Ω^k β_s ds`.
///
/// For `k ≥ 2` the second tangent must satisfy `|dH_j(Y)| ≤ membership_tol`
/// for `j = 1..k−1`.
pub fn omega_k(
    kappa: &RealField,
    t1: &EcaTangent,
    t2: &EcaTangent,
    k: usize,
    level: &LevelSetSpec,
) -> Result<f64> {
    kappa.ensure_same_grid(&t1.alpha)?;
    t1.alpha.ensure_same_grid(&t2.alpha)?;
    if k >= 2 {
        check_level_tangent(kappa, t2, k - 1, level.membership_tol)?;
    }
    let v = omega_k_of_ds(kappa, &t2.alpha, k)?;
    Ok((&t1.alpha * &v).integrate())
}

/// Both sides of `∫ (D_s^{-1} Ω D_s α) β_s ds = ∫ α Ω β_s ds`.
pub fn lemma31(kappa: &RealField, alpha: &RealField, beta: &RealField, mean_tol: f64) -> Result<Comparison> {
    kappa.ensure_same_grid(alpha)?;
    alpha.ensure_same_grid(beta)?;
    let lhs_factor = omega_ds(kappa, alpha).ds_inv(mean_tol)?;
    let lhs = (&lhs_factor * &beta.ds()).integrate();
    let rhs = (alpha * &omega_ds(kappa, beta)).integrate();
    Ok(Comparison::new(lhs, rhs))
}

pub fn lemma31_residual(kappa: &RealField, alpha: &RealField, beta: &RealField, mean_tol: f64) -> Result<f64> {
    Ok(lemma31(kappa, alpha, beta, mean_tol)?.residual)
}

/// `{F, G}_k = ∫ gf · Ω^k D_s gg ds`.
pub fn bracket_k(kappa: &RealField, gf: &RealField, gg: &RealField, k: usize) -> Result<f64> {
    kappa.ensure_same_grid(gf)?;
    gf.ensure_same_grid(gg)?;
    Ok((gf * &omega_k_of_ds(kappa, gg, k)?).integrate())
}

/// `(D_s² + κ) Y` for a vector field along γ.
fn hill_operator(kappa: &RealField, y: &PlaneField) -> PlaneField {
    y.ds_n(2).add(&y.scale_by(kappa))
}

/// The form `ω_k` written with the operator `φX = −α_s γ`:
/// `k = 0` gives `∫ det(X, φY)`, and `k ≥ 1` gives
/// `∫ det(X, ((D_s² + κ) φ^{-1})^{k−1} (D_s² + κ) Y)`.
pub fn phi_form(gamma: &EcaCurve, t1: &EcaTangent, t2: &EcaTangent, k: usize, mean_tol: f64) -> Result<f64> {
    let x = tangent_embed(gamma, t1)?;
    let g = gamma.as_plane();
    if k == 0 {
        let phi_y = g.scale_by(&(t2.alpha.ds() * -1.0));
        return Ok(x.det(&phi_y).integrate());
    }
    let kappa = gamma.curvature();
    let gs = g.ds();
    let mut y = tangent_embed(gamma, t2)?;
    for step in 1..k {
        let w = hill_operator(&kappa, &y);
        // φ^{-1}: W = −α'_s γ  ⇒  α'_s = −det(W, γ_s)
        let a = w.det(&gs) * -1.0;
        let alpha = a.ds_inv(mean_tol).map_err(|e| with_step(e, step))?;
        y = tangent_embed(gamma, &EcaTangent::new(alpha))?;
    }
    Ok(x.det(&hill_operator(&kappa, &y)).integrate())
}

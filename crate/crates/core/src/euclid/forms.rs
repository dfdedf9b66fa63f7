//! Presymplectic forms `ω̂_k` on unit-speed curves.

use crate::calculus::{RealField, DEFAULT_MEAN_TOL};
use crate::eca::level::LevelSetSpec;
use crate::euclid::curve::EucTangent;
use crate::euclid::hierarchy::{differential_h_hat, omega_hat_op, omega_hat_tangent};
use crate::error::{Error, Result};

/// Fails with [`Error::NotLevelTangent`] unless `|dĤ_j(t)| ≤ tol` for `j = 1..=m`.
pub fn check_level_tangent_hat(kappa_hat: &RealField, t: &EucTangent, m: usize, tol: f64) -> Result<()> {
    for order in 1..=m {
        let value = differential_h_hat(kappa_hat, order, t)?;
        if value.abs() > tol {
            return Err(Error::NotLevelTangent { order, value });
        }
    }
    Ok(())
}

/// `ω̂_k(X, Y) = ∫ (κ̂λ + μ_s) Ω̂^k μ̃ ds`.
///
/// The first Ω̂ uses `D_s^{-1}(κ̂μ̃) = λ̃`; later powers use the mean-zero
/// antiderivative. For `k ≥ 2` the second tangent must satisfy
/// `|dĤ_j(Y)| ≤ membership_tol` for `j = 1..k−1`.
pub fn omega_hat_k(
    kappa_hat: &RealField,
    t1: &EucTangent,
    t2: &EucTangent,
    k: usize,
    level: &LevelSetSpec,
) -> Result<f64> {
    kappa_hat.ensure_same_grid(&t1.mu)?;
    t1.mu.ensure_same_grid(&t2.mu)?;
    if k >= 2 {
        check_level_tangent_hat(kappa_hat, t2, k - 1, level.membership_tol)?;
    }
    let mut v = t2.mu.clone();
    if k >= 1 {
        v = omega_hat_tangent(kappa_hat, &t2.lambda, &t2.mu);
    }
    for step in 1..k {
        v = omega_hat_op(kappa_hat, &v, DEFAULT_MEAN_TOL).map_err(|e| match e {
            Error::NonZeroMean { mean, .. } => Error::NonZeroMean {
                mean,
                step: Some(step),
            },
            other => other,
        })?;
    }
    let left = kappa_hat * &t1.lambda + t1.mu.ds();
    Ok((&left * &v).integrate())
}

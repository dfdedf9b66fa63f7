//! mKdV recursion operator, hierarchy fields and conserved quantities.

use crate::calculus::RealField;
use crate::euclid::curve::{EucCurve, EucTangent};
use crate::error::{Error, Result};

/// `Ω̂ f = ½(f_ss + κ̂²f + κ̂_s D_s^{-1}(κ̂f))` with the mean-zero antiderivative.
pub fn omega_hat_op(kappa_hat: &RealField, f: &RealField, mean_tol: f64) -> Result<RealField> {
    kappa_hat.ensure_same_grid(f)?;
    let inv = (kappa_hat * f).ds_inv(mean_tol)?;
    Ok(omega_hat_tangent(kappa_hat, &inv, f))
}

/// `½(μ_ss + κ̂²μ + κ̂_s λ)`, i.e. Ω̂μ with `D_s^{-1}(κ̂μ) = λ`.
///
/// For a tangent `(λ, μ)` this is half the curvature variation `κ̂_t`.
pub fn omega_hat_tangent(kappa_hat: &RealField, lambda: &RealField, mu: &RealField) -> RealField {
    (mu.ds_n(2) + &(&(kappa_hat * kappa_hat) * mu) + kappa_hat.ds() * lambda) * 0.5
}

/// Curvature variation `κ̂_t = μ_ss + κ̂²μ + κ̂_s λ` induced by `(λ, μ)`.
pub fn curvature_variation_hat(kappa_hat: &RealField, t: &EucTangent) -> Result<RealField> {
    kappa_hat.ensure_same_grid(&t.mu)?;
    Ok(omega_hat_tangent(kappa_hat, &t.lambda, &t.mu) * 2.0)
}

/// Conserved density `ĥ_m` for `m = 1, 2, 3`.
pub fn density_hat(kappa_hat: &RealField, m: usize) -> Result<RealField> {
    let k = kappa_hat;
    let k2 = k * k;
    match m {
        1 => Ok(&k2 * 0.25),
        2 => {
            let k_s = k.ds();
            Ok(&(&k2 * &k2) * (1.0 / 32.0) - &(&k_s * &k_s) * 0.125)
        }
        3 => {
            let k_s = k.ds();
            let k_ss = k.ds_n(2);
            Ok(&(&(&k2 * &k2) * &k2) * (1.0 / 128.0) - &(&(&k2 * &k_s) * &k_s) * (5.0 / 32.0)
                + &(&k_ss * &k_ss) * (1.0 / 16.0))
        }
        _ => Err(Error::UnsupportedOrder { order: m }),
    }
}

/// `Ĥ_m = ∫ ĥ_m ds` for `m = 1, 2, 3`.
pub fn hamiltonian_hat(kappa_hat: &RealField, m: usize) -> Result<f64> {
    Ok(density_hat(kappa_hat, m)?.integrate())
}

/// Variational gradient `Ĝ_m = δĤ_m/δκ̂` for `m = 1, 2, 3`.
pub fn gradient_hat(kappa_hat: &RealField, m: usize) -> Result<RealField> {
    let k = kappa_hat;
    let k2 = k * k;
    match m {
        1 => Ok(k * 0.5),
        2 => Ok(&(&k2 * k) * 0.125 + k.ds_n(2) * 0.25),
        3 => {
            let k_s = k.ds();
            let k_ss = k.ds_n(2);
            Ok(&(&(&k2 * &k2) * k) * (3.0 / 64.0)
                + &(&(k * &k_s) * &k_s) * (5.0 / 16.0)
                + &(&k2 * &k_ss) * (5.0 / 16.0)
                + k.ds_n(4) * 0.125)
        }
        _ => Err(Error::UnsupportedOrder { order: m }),
    }
}

/// The pairs `(λ_j, μ_j)`, `j = 1..=n`, of the hierarchy fields `X̂_j`.
///
/// `μ_1 = ½κ̂_s`, `λ_j = D_s^{-1}(κ̂μ_j) + c_j` and
/// `μ_{j+1} = Ω̂μ_j` evaluated with `D_s^{-1}(κ̂μ_j) = λ_j`. The constants are
/// fixed by `∫λ_j = (2j − 1)Ĥ_j` for `j ≤ 3` and are zero beyond.
pub fn mkdv_pairs(kappa_hat: &RealField, n: usize) -> Result<Vec<EucTangent>> {
    let mut out = Vec::with_capacity(n);
    let mut mu = kappa_hat.ds() * 0.5;
    let two_pi = 2.0 * std::f64::consts::PI;
    for j in 1..=n {
        let mean = if j <= 3 {
            (2 * j - 1) as f64 * hamiltonian_hat(kappa_hat, j)? / two_pi
        } else {
            0.0
        };
        let t = EucTangent::from_mu(kappa_hat, &mu, mean).map_err(|e| match e {
            Error::NonZeroMean { mean, .. } => Error::NonZeroMean {
                mean,
                step: Some(j - 1),
            },
            other => other,
        })?;
        mu = omega_hat_tangent(kappa_hat, &t.lambda, &t.mu);
        out.push(t);
    }
    Ok(out)
}

/// `Ω̂^n κ̂_s`, the right-hand side of the n-th mKdV equation.
pub fn mkdv_velocity(kappa_hat: &RealField, n: usize) -> Result<RealField> {
    if n == 0 {
        return Ok(kappa_hat.ds());
    }
    let pairs = mkdv_pairs(kappa_hat, n)?;
    let last = &pairs[n - 1];
    curvature_variation_hat(kappa_hat, last)
}

/// Hierarchy field `X̂_n = λ_n T + μ_n N` with `μ_n = ½Ω̂^{n−1}κ̂_s`.
pub fn xhat_n_field(gamma_hat: &EucCurve, n: usize) -> Result<EucTangent> {
    if n == 0 {
        return Err(Error::UnsupportedOrder { order: 0 });
    }
    let kappa_hat = gamma_hat.curvature();
    Ok(mkdv_pairs(&kappa_hat, n)?.pop().expect("n ≥ 1"))
}

/// `dĤ_m(t) = ∫ Ĝ_m κ̂_t ds` for `m = 1, 2, 3`.
pub fn differential_h_hat(kappa_hat: &RealField, m: usize, t: &EucTangent) -> Result<f64> {
    let g = gradient_hat(kappa_hat, m)?;
    Ok((&g * &curvature_variation_hat(kappa_hat, t)?).integrate())
}

/// Step used by [`differential_h_hat_fd`].
pub const FD_STEP: f64 = 1e-5;

/// `dĤ_m(t)` by a fourth-order central difference along the deformation
/// `γ̂ + h(λT + μN)`; the deformed curvature is measured on the normalized
/// tangent so the curve stays unit speed to first order.
pub fn differential_h_hat_fd(gamma_hat: &EucCurve, m: usize, t: &EucTangent, h: f64) -> Result<f64> {
    let v = crate::euclid::curve::euc_tangent_embed(gamma_hat, t)?;
    let g = gamma_hat.as_plane();
    let value = |eps: f64| -> Result<f64> {
        let gs = g.add(&v.scale(eps)).ds();
        let tangent = gs.scale_by(&gs.norm().map(|r| 1.0 / r));
        let kappa = tangent.det(&tangent.ds());
        hamiltonian_hat(&kappa, m)
    };
    let (p1, m1, p2, m2) = (value(h)?, value(-h)?, value(2.0 * h)?, value(-2.0 * h)?);
    Ok((8.0 * (p1 - m1) - (p2 - m2)) / (12.0 * h))
}

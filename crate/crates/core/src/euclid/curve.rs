use num_complex::Complex64;
use serde::Serialize;

use crate::calculus::{PeriodicGrid, RealField, DEFAULT_MEAN_TOL};
use crate::error::{ClosureFailure, Error, Result};
use crate::plane::{Mat2, PlaneField};

pub const DEFAULT_SPEED_TOL: f64 = 1e-8;
pub const DEFAULT_EUC_CLOSURE_TOL: f64 = 1e-8;
/// Tolerance on `λ_s − κ̂μ` when a tangent is built from μ.
pub const DEFAULT_EUC_TANGENT_TOL: f64 = 1e-8;

/// Closed unit-speed plane curve.
#[derive(Debug, Clone, PartialEq)]
pub struct EucCurve {
    gamma: PlaneField,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EucReport {
    pub max_speed_defect: f64,
    pub ok: bool,
}

impl EucCurve {
    pub fn new(x: RealField, y: RealField) -> Result<Self> {
        Ok(EucCurve {
            gamma: PlaneField::new(x, y)?,
        })
    }

    pub fn from_plane(gamma: PlaneField) -> Self {
        EucCurve { gamma }
    }

    /// Unit circle, counterclockwise unless `clockwise`.
    pub fn unit_circle(grid: &PeriodicGrid, clockwise: bool) -> Self {
        let sign = if clockwise { -1.0 } else { 1.0 };
        EucCurve {
            gamma: PlaneField::from_fn(grid, |s| (s.cos(), sign * s.sin())),
        }
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

    /// `⟨γ̂_s, γ̂_s⟩ − 1` at every node.
    pub fn speed_defect(&self) -> RealField {
        let t = self.gamma.ds();
        t.dot(&t).add_constant(-1.0)
    }

    pub fn validate(&self, speed_tol: f64) -> EucReport {
        let max_speed_defect = self.speed_defect().max_abs();
        EucReport {
            max_speed_defect,
            ok: max_speed_defect <= speed_tol,
        }
    }

    /// Unit tangent `T = γ̂_s`.
    pub fn tangent(&self) -> PlaneField {
        self.gamma.ds()
    }

    /// Left normal `N`, the tangent rotated by +π/2.
    pub fn normal(&self) -> PlaneField {
        self.tangent().rotate_left()
    }

    /// `κ̂ = det(T, T_s)`.
    pub fn curvature(&self) -> RealField {
        let t = self.tangent();
        t.det(&t.ds())
    }
}

pub fn euc_curvature(gamma_hat: &EucCurve) -> RealField {
    gamma_hat.curvature()
}

/// `γ̂ ↦ Rγ̂ + v` for `R ∈ O(2)`. Reflections flip the sign of κ̂.
pub fn e2_apply(r: &Mat2, v: [f64; 2], gamma_hat: &EucCurve) -> Result<EucCurve> {
    let mut defect: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let dot = r[0][i] * r[0][j] + r[1][i] * r[1][j];
            let id = if i == j { 1.0 } else { 0.0 };
            defect = defect.max((dot - id).abs());
        }
    }
    if defect > 1e-12 {
        return Err(Error::NotOrthogonal { defect });
    }
    Ok(EucCurve::from_plane(gamma_hat.as_plane().apply_matrix(r).translate(v)))
}

/// Rotation by `angle`.
pub fn rotation(angle: f64) -> Mat2 {
    let (s, c) = angle.sin_cos();
    [[c, -s], [s, c]]
}

/// Turning-angle reconstruction `θ = D_s^{-1}(κ̂ − κ̄) + κ̄ s`,
/// `γ̂ = D_s^{-1}(cos θ, sin θ)`.
///
/// Fails unless κ̄ is an integer and `|∫ e^{iθ} ds| ≤ closure_tol`.
pub fn euc_from_curvature(kappa_hat: &RealField, closure_tol: f64) -> Result<EucCurve> {
    let grid = kappa_hat.grid();
    let mean = kappa_hat.mean();
    let rotation_index_defect = (mean - mean.round()).abs();
    let theta = kappa_hat.add_constant(-mean).ds_inv(DEFAULT_MEAN_TOL)?
        + RealField::from_fn(grid, |s| mean * s);
    let cos = theta.map(f64::cos);
    let sin = theta.map(f64::sin);
    let closure_defect = Complex64::new(cos.integrate(), sin.integrate()).norm();
    if !(closure_defect <= closure_tol && rotation_index_defect <= closure_tol) {
        return Err(Error::NotClosed(ClosureFailure::Euclidean {
            closure_defect,
            rotation_index_defect,
        }));
    }
    EucCurve::new(cos.ds_inv_centered(), sin.ds_inv_centered())
}

/// Rotation index `(1/2π) ∫ κ̂ ds`, rounded.
pub fn rotation_index(kappa_hat: &RealField) -> i64 {
    kappa_hat.mean().round() as i64
}

/// Tangent `λT + μN` to the space of unit-speed curves; requires `λ_s = κ̂μ`.
#[derive(Debug, Clone, PartialEq)]
pub struct EucTangent {
    pub lambda: RealField,
    pub mu: RealField,
}

impl EucTangent {
    /// Unchecked constructor; see [`EucTangent::tangency_residual`].
    pub fn new(lambda: RealField, mu: RealField) -> Result<Self> {
        lambda.ensure_same_grid(&mu)?;
        Ok(EucTangent { lambda, mu })
    }

    /// `λ = D_s^{-1}(κ̂μ) + lambda_mean`. Needs `mean(κ̂μ) ≈ 0`.
    pub fn from_mu(kappa_hat: &RealField, mu: &RealField, lambda_mean: f64) -> Result<Self> {
        kappa_hat.ensure_same_grid(mu)?;
        let lambda = (kappa_hat * mu).ds_inv(DEFAULT_MEAN_TOL)?.add_constant(lambda_mean);
        Self::new(lambda, mu.clone())
    }

    /// Like [`EucTangent::from_mu`] after removing the multiple of κ̂ from μ
    /// that makes `mean(κ̂μ)` non-zero.
    pub fn from_mu_projected(kappa_hat: &RealField, mu: &RealField, lambda_mean: f64) -> Result<Self> {
        let k2 = (kappa_hat * kappa_hat).mean();
        let mu = if k2 > 0.0 {
            mu - &(kappa_hat * ((kappa_hat * mu).mean() / k2))
        } else {
            mu.clone()
        };
        Self::from_mu(kappa_hat, &mu, lambda_mean)
    }

    pub fn grid(&self) -> &PeriodicGrid {
        self.lambda.grid()
    }

    /// `max |λ_s − κ̂μ|`.
    pub fn tangency_residual(&self, kappa_hat: &RealField) -> f64 {
        self.lambda.ds().max_abs_diff(&(kappa_hat * &self.mu))
    }
}

/// `λT + μN` along γ̂.
pub fn euc_tangent_embed(gamma_hat: &EucCurve, t: &EucTangent) -> Result<PlaneField> {
    gamma_hat.x().ensure_same_grid(&t.lambda)?;
    Ok(gamma_hat
        .tangent()
        .scale_by(&t.lambda)
        .add(&gamma_hat.normal().scale_by(&t.mu)))
}

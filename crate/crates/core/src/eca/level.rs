//! Level sets `𝓜(C_m) = H_1^{-1}(c_1) ∩ … ∩ H_m^{-1}(c_m)` and projection of
//! tangents onto them.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::calculus::{RealField, DEFAULT_MEAN_TOL};
use crate::eca::curve::EcaTangent;
use crate::eca::hierarchy::{curvature_variation, differential_h, hamiltonian, omega_power, with_step};
use crate::error::{Error, Result};

pub const DEFAULT_MEMBERSHIP_TOL: f64 = 1e-9;
/// Largest admissible condition number of the constraint matrix.
pub const MAX_CONSTRAINT_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelSetSpec {
    pub constants: Vec<f64>,
    #[serde(default = "default_membership_tol")]
    pub membership_tol: f64,
}

fn default_membership_tol() -> f64 {
    DEFAULT_MEMBERSHIP_TOL
}

impl LevelSetSpec {
    pub fn new(constants: Vec<f64>, membership_tol: f64) -> Result<Self> {
        if !(membership_tol > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "membership_tol must be positive, got {membership_tol}"
            )));
        }
        Ok(LevelSetSpec {
            constants,
            membership_tol,
        })
    }

    /// The level set through κ with `m` constraints.
    pub fn through(kappa: &RealField, m: usize) -> Result<Self> {
        let constants = (1..=m).map(|j| hamiltonian(kappa, j)).collect::<Result<_>>()?;
        Self::new(constants, DEFAULT_MEMBERSHIP_TOL)
    }

    /// Only the tolerance matters; used where no level constants are needed.
    pub fn unconstrained() -> Self {
        LevelSetSpec {
            constants: Vec::new(),
            membership_tol: DEFAULT_MEMBERSHIP_TOL,
        }
    }

    pub fn m(&self) -> usize {
        self.constants.len()
    }

    /// Checks `|H_j(κ) − c_j| ≤ membership_tol (1 + |c_j|)` for every constraint.
    pub fn check_membership(&self, kappa: &RealField) -> Result<()> {
        for (j, &c) in self.constants.iter().enumerate() {
            let value = hamiltonian(kappa, j + 1)?;
            if (value - c).abs() > self.membership_tol * (1.0 + c.abs()) {
                return Err(Error::NotOnLevelSet {
                    order: j + 1,
                    value,
                    target: c,
                });
            }
        }
        Ok(())
    }
}

/// Fails with [`Error::NotLevelTangent`] unless `|dH_j(t)| ≤ tol` for `j = 1..=m`.
pub fn check_level_tangent(kappa: &RealField, t: &EcaTangent, m: usize, tol: f64) -> Result<()> {
    for order in 1..=m {
        let value = differential_h(kappa, order, t)?;
        if value.abs() > tol {
            return Err(Error::NotLevelTangent { order, value });
        }
    }
    Ok(())
}

/// `∫ Ω^j α_s ds` for `j = 1..=m`, with the first Ω acting on `α_s` through α.
pub fn level_integrals(kappa: &RealField, t: &EcaTangent, m: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(m);
    if m == 0 {
        return Ok(out);
    }
    let first = curvature_variation(kappa, t)?;
    out.push(first.integrate());
    for j in 2..=m {
        let v = omega_power(kappa, &first, j - 1, DEFAULT_MEAN_TOL)
            .map_err(|e| with_step(e, j - 1))?
            .value;
        out.push(v.integrate());
    }
    Ok(out)
}

/// Projects α onto the tangent space of `𝓜(C_m)` by subtracting a minimum-norm
/// combination of the low modes `cos(is), sin(is)`, `i = 1..=m+2`.
pub fn project_level_tangent(
    kappa: &RealField,
    alpha: &RealField,
    level: &LevelSetSpec,
) -> Result<EcaTangent> {
    kappa.ensure_same_grid(alpha)?;
    let m = level.m();
    let t = EcaTangent::new(alpha.clone());
    let residual: Vec<f64> = (1..=m)
        .map(|j| differential_h(kappa, j, &t))
        .collect::<Result<_>>()?;
    if residual.iter().all(|r| r.abs() <= level.membership_tol) {
        return Ok(t);
    }

    let grid = kappa.grid();
    let basis: Vec<RealField> = (1..=m + 2)
        .flat_map(|i| {
            let k = i as f64;
            [
                RealField::from_fn(grid, move |s| (k * s).cos()),
                RealField::from_fn(grid, move |s| (k * s).sin()),
            ]
        })
        .collect();
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for (j, &r) in residual.iter().enumerate() {
        let row: Vec<f64> = basis
            .iter()
            .map(|b| differential_h(kappa, j + 1, &EcaTangent::new(b.clone())))
            .collect::<Result<_>>()?;
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm <= level.membership_tol {
            // the functional vanishes on every direction; nothing to correct
            if r.abs() > level.membership_tol {
                return Err(Error::DegenerateConstraint {
                    condition: f64::INFINITY,
                });
            }
            continue;
        }
        rows.push(row.into_iter().map(|v| v / norm).collect::<Vec<_>>());
        rhs.push(r / norm);
    }
    let a = DMatrix::from_fn(rows.len(), basis.len(), |i, j| rows[i][j]);
    let svd = a.clone().svd(true, true);
    let sv = &svd.singular_values;
    let (smax, smin) = (sv.max(), sv.min());
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if condition > MAX_CONSTRAINT_CONDITION {
        return Err(Error::DegenerateConstraint { condition });
    }
    let coeffs = svd
        .solve(&DVector::from_vec(rhs), 0.0)
        .map_err(|_| Error::DegenerateConstraint { condition })?;
    let mut projected = alpha.clone();
    for (b, c) in basis.iter().zip(coeffs.iter()) {
        projected = projected - &(b * *c);
    }
    Ok(EcaTangent::new(projected))
}

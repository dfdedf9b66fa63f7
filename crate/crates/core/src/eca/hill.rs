//! Reconstruction of an equicentroaffine curve from its curvature by solving
//! Hill's equation `y'' = −κ y`.

use crate::calculus::RealField;
use crate::eca::curve::EcaCurve;
use crate::error::{ClosureFailure, Error, Result};
use crate::plane::Mat2;

pub const DEFAULT_CLOSURE_TOL: f64 = 1e-8;
pub const DEFAULT_SUBSTEPS: usize = 16;

/// Fundamental solutions of Hill's equation at the grid nodes together with
/// the monodromy matrix `[[y₁, y₂], [y₁', y₂']](2π)`.
#[derive(Debug, Clone)]
pub struct HillSolution {
    pub y1: Vec<f64>,
    pub y2: Vec<f64>,
    pub monodromy: Mat2,
}

impl HillSolution {
    /// Frobenius norm of `M − I`.
    pub fn monodromy_defect(&self) -> f64 {
        let m = &self.monodromy;
        ((m[0][0] - 1.0).powi(2) + m[0][1].powi(2) + m[1][0].powi(2) + (m[1][1] - 1.0).powi(2)).sqrt()
    }
}

/// Classical RK4 on `Y' = [[0, 1], [−κ, 0]] Y`, `Y(0) = I`, with `substeps`
/// steps per grid cell. κ at stage points comes from trigonometric
/// interpolation.
pub fn solve_hill(kappa: &RealField, substeps: usize) -> Result<HillSolution> {
    if substeps == 0 {
        return Err(Error::InvalidSpec("substeps must be positive".into()));
    }
    let n = kappa.n_points();
    let steps = n * substeps;
    // half-step samples: fine[2i] at s_i, fine[2i+1] at s_i + h/2
    let fine = kappa.resample(2 * steps)?;
    let k = fine.samples();
    let h = 2.0 * std::f64::consts::PI / steps as f64;

    // state: (y1, y1', y2, y2')
    let f = |kap: f64, y: [f64; 4]| [y[1], -kap * y[0], y[3], -kap * y[2]];
    let mut y = [1.0, 0.0, 0.0, 1.0];
    let mut y1 = Vec::with_capacity(n);
    let mut y2 = Vec::with_capacity(n);
    for i in 0..steps {
        if i % substeps == 0 {
            y1.push(y[0]);
            y2.push(y[2]);
        }
        let (k0, kh, k1) = (k[2 * i], k[2 * i + 1], k[(2 * i + 2) % (2 * steps)]);
        let a = f(k0, y);
        let b = f(kh, axpy(y, 0.5 * h, a));
        let c = f(kh, axpy(y, 0.5 * h, b));
        let d = f(k1, axpy(y, h, c));
        for j in 0..4 {
            y[j] += h / 6.0 * (a[j] + 2.0 * b[j] + 2.0 * c[j] + d[j]);
        }
    }
    Ok(HillSolution {
        y1,
        y2,
        monodromy: [[y[0], y[2]], [y[1], y[3]]],
    })
}

fn axpy(y: [f64; 4], h: f64, k: [f64; 4]) -> [f64; 4] {
    [y[0] + h * k[0], y[1] + h * k[1], y[2] + h * k[2], y[3] + h * k[3]]
}

/// `γ = (y₁, y₂)` from the fundamental solutions; the Wronskian normalization
/// `y₁(0) = y₂'(0) = 1` gives `det(γ, γ_s) = 1`.
pub fn eca_from_curvature(kappa: &RealField, closure_tol: f64, substeps: usize) -> Result<EcaCurve> {
    let sol = solve_hill(kappa, substeps)?;
    let defect = sol.monodromy_defect();
    if !(defect <= closure_tol) {
        return Err(Error::NotClosed(ClosureFailure::Monodromy {
            matrix: sol.monodromy,
            defect,
        }));
    }
    let grid = kappa.grid();
    EcaCurve::new(RealField::new(grid, sol.y1)?, RealField::new(grid, sol.y2)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::PeriodicGrid;
    use crate::plane::mat_det;

    fn grid() -> PeriodicGrid {
        PeriodicGrid::new(64).unwrap()
    }

    #[test]
    fn constant_one_gives_the_circle() {
        let kappa = RealField::constant(&grid(), 1.0);
        let c = eca_from_curvature(&kappa, DEFAULT_CLOSURE_TOL, DEFAULT_SUBSTEPS).unwrap();
        assert!(c.as_plane().max_abs_diff(EcaCurve::unit_circle(&grid()).as_plane()) < 1e-9);
        assert!(c.curvature().max_abs_diff(&kappa) < 1e-8);
    }

    #[test]
    fn quarter_curvature_has_minus_identity_monodromy() {
        let kappa = RealField::constant(&grid(), 0.25);
        match eca_from_curvature(&kappa, DEFAULT_CLOSURE_TOL, DEFAULT_SUBSTEPS) {
            Err(Error::NotClosed(ClosureFailure::Monodromy { matrix, .. })) => {
                let want = [[-1.0, 0.0], [0.0, -1.0]];
                for i in 0..2 {
                    for j in 0..2 {
                        assert!((matrix[i][j] - want[i][j]).abs() < 1e-9);
                    }
                }
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn small_perturbation() {
        let kappa = RealField::from_fn(&grid(), |s| 1.0 + 0.01 * (3.0 * s).cos());
        match eca_from_curvature(&kappa, DEFAULT_CLOSURE_TOL, DEFAULT_SUBSTEPS) {
            Ok(c) => assert!(c.curvature().max_abs_diff(&kappa) <= 1e-8),
            Err(Error::NotClosed(ClosureFailure::Monodromy { matrix, defect })) => {
                assert!((mat_det(&matrix) - 1.0).abs() < 1e-10);
                assert!(defect < 1e-2);
            }
            Err(e) => panic!("{e}"),
        }
    }

    #[test]
    fn round_trip_of_closed_seed() {
        let gamma = EcaCurve::from_polar(&PeriodicGrid::new(128).unwrap(), |t| 1.0 + 0.05 * (3.0 * t).cos())
            .unwrap();
        let kappa = gamma.curvature();
        let back = eca_from_curvature(&kappa, DEFAULT_CLOSURE_TOL, DEFAULT_SUBSTEPS).unwrap();
        assert!(back.curvature().max_abs_diff(&kappa) <= 1e-8);
        assert!(back.validate(1e-9).ok);
    }
}

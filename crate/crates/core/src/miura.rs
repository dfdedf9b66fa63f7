//! Geometric Miura transformation from unit-speed curves to complex
//! equicentroaffine curves, and the identities relating the mKdV and KdV
//! hierarchies through it.

use num_complex::Complex64;
use serde::Serialize;

use crate::calculus::{ComplexField, PeriodicGrid, RealField, DEFAULT_MEAN_TOL};
use crate::eca::hierarchy::{hamiltonian, omega_ds, omega_op, omega_power};
use crate::euclid::curve::{rotation_index, EucCurve, EucTangent};
use crate::euclid::hierarchy::{hamiltonian_hat, omega_hat_op};
use crate::error::{Error, Result};

pub use crate::flow::experiments::flow_conjugacy_residual;

/// `κ = ¼κ̂² + (i/2)κ̂_s`.
pub fn miura_curvature(kappa_hat: &RealField) -> ComplexField {
    let re = &(kappa_hat * kappa_hat) * 0.25;
    let im = kappa_hat.ds() * 0.5;
    ComplexField::from_parts(&re, &im).expect("same grid")
}

/// Complex curve `Γ = (Γ₁, Γ₂)` with samples in ℂ².
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexEcaCurve {
    pub x: ComplexField,
    pub y: ComplexField,
}

impl ComplexEcaCurve {
    /// `det(Γ, Γ_s) − 1`, meaningful only for periodic Γ.
    pub fn det_defect(&self) -> ComplexField {
        let (xs, ys) = (self.x.ds(), self.y.ds());
        (&self.x * &ys - &self.y * &xs).add_constant(Complex64::new(-1.0, 0.0))
    }

    /// `det(Γ_s, Γ_ss)`, meaningful only for periodic Γ.
    pub fn curvature(&self) -> ComplexField {
        let (xs, ys) = (self.x.ds(), self.y.ds());
        &xs * &ys.ds() - &ys * &xs.ds()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MiuraBranchReport {
    pub antiperiodic: bool,
    #[serde(skip)]
    pub branch_values: ComplexField,
    /// `|w(2π) − (±1) w(0)|` where `w(2π)` is the branch continued through
    /// the last grid cell and the sign is `−1` when antiperiodic.
    pub jump_defect: f64,
    pub rotation_index: i64,
}

/// Square root of `z` closest to `prev`.
fn nearest_root(z: Complex64, prev: Complex64) -> Complex64 {
    let r = z.sqrt();
    if (r - prev).norm() <= (-r - prev).norm() {
        r
    } else {
        -r
    }
}

/// `Φ(γ̂) = (−γ̂_s)^{-1/2} (γ̂, 1)` with `ℝ² ≅ ℂ`, together with the branch
/// bookkeeping of the square root.
pub fn miura_curve(gamma_hat: &EucCurve) -> (ComplexEcaCurve, MiuraBranchReport) {
    let grid = gamma_hat.grid().clone();
    let z = ComplexField::from_parts(gamma_hat.x(), gamma_hat.y()).expect("same grid");
    let inv = z.ds().map(|v| Complex64::new(1.0, 0.0) / (-v));
    let mut w = Vec::with_capacity(grid.n_points());
    let mut prev = inv.samples()[0].sqrt();
    for &v in inv.samples() {
        prev = nearest_root(v, prev);
        w.push(prev);
    }
    let closing = nearest_root(inv.samples()[0], prev);
    let w0 = w[0];
    let antiperiodic = (closing + w0).norm() < (closing - w0).norm();
    let sign = if antiperiodic { -1.0 } else { 1.0 };
    let jump_defect = (closing - w0 * sign).norm();
    let branch = ComplexField::from_vec(&grid, w);
    let curve = ComplexEcaCurve {
        x: &branch * &z,
        y: branch.clone(),
    };
    let report = MiuraBranchReport {
        antiperiodic,
        branch_values: branch,
        jump_defect,
        rotation_index: rotation_index(&gamma_hat.curvature()),
    };
    (curve, report)
}

/// `Ω̂` applied to a complex field, componentwise (the coefficients are real).
fn omega_hat_complex(kappa_hat: &RealField, f: &ComplexField, mean_tol: f64) -> Result<ComplexField> {
    let re = omega_hat_op(kappa_hat, &f.re(), mean_tol)?;
    let im = omega_hat_op(kappa_hat, &f.im(), mean_tol)?;
    ComplexField::from_parts(&re, &im)
}

/// `(iD_s + κ̂) f`.
fn miura_factor(kappa_hat: &RealField, f: &ComplexField) -> ComplexField {
    f.ds().scale(Complex64::new(0.0, 1.0)) + &kappa_hat.to_complex() * f
}

/// Both sides of `(iD_s + κ̂)Ω̂ f = Ω(iD_s + κ̂) f` with Ω built on
/// `κ = miura_curvature(κ̂)`; returns the max abs difference.
///
/// Requires `mean(f) = 0` and `mean(κ̂f) = 0` so that both antiderivatives
/// exist and agree on their constants.
pub fn intertwine_residual(kappa_hat: &RealField, f: &ComplexField) -> Result<f64> {
    let (lhs, rhs) = intertwine_sides(kappa_hat, f)?;
    Ok(lhs.max_abs_diff(&rhs))
}

/// Both sides of the intertwining identity applied to `f`, left then right,
/// sampled on the grid of `f`.
///
/// The sides contain products of up to four band-limited factors. When those
/// would alias on the input grid, both sides are evaluated on a 4x refined
/// grid, where every product of interpolants is resolved, and sampled back at
/// the original nodes.
pub fn intertwine_sides(kappa_hat: &RealField, f: &ComplexField) -> Result<(ComplexField, ComplexField)> {
    kappa_hat.ensure_same_grid(&f.re())?;
    let mean = f.mean();
    if mean.norm() > DEFAULT_MEAN_TOL * (1.0 + f.max_abs()) {
        return Err(Error::NonZeroMean { mean, step: None });
    }
    let grid = f.grid().clone();
    let n = grid.n_points();
    let band = bandwidth(&kappa_hat.to_complex()).max(bandwidth(f));
    let fine = if 8 * band < n { n } else { 4 * n };
    let (kh, ff) = (kappa_hat.resample(fine)?, f.resample(fine)?);
    let lhs = miura_factor(&kh, &omega_hat_complex(&kh, &ff, DEFAULT_MEAN_TOL)?);
    let kappa = miura_curvature(&kh);
    let rhs = omega_op(&kappa, &miura_factor(&kh, &ff), DEFAULT_MEAN_TOL)?;
    let stride = fine / n;
    let coarse = |x: &ComplexField| ComplexField::new(&grid, x.samples().iter().step_by(stride).copied().collect());
    Ok((coarse(&lhs)?, coarse(&rhs)?))
}

/// Highest wavenumber carrying more than roundoff.
fn bandwidth(f: &ComplexField) -> usize {
    let c = f.coefficients();
    let top = c.iter().map(|z| z.norm()).fold(0.0, f64::max);
    (0..c.len())
        .filter(|&j| c[j].norm() > 1e-13 * top)
        .map(|j| f.grid().wavenumber(j).unsigned_abs() as usize)
        .max()
        .unwrap_or(0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PullbackReport {
    /// `|∫h_m(κ) − Ĥ_m|` with κ the complex Miura curvature.
    pub residual: f64,
    /// Imaginary part of `∫h_m(κ)`.
    pub imaginary: f64,
}

pub fn pullback_hamiltonian_residual(kappa_hat: &RealField, m: usize) -> Result<PullbackReport> {
    let h = hamiltonian(&miura_curvature(kappa_hat), m)?;
    let h_hat = hamiltonian_hat(kappa_hat, m)?;
    Ok(PullbackReport {
        residual: (h - h_hat).norm(),
        imaginary: h.im,
    })
}

/// Push-forward of a Euclidean tangent: `α = λ + iμ`.
pub fn tangent_map(t: &EucTangent) -> ComplexField {
    ComplexField::from_parts(&t.lambda, &t.mu).expect("same grid")
}

/// `∫ α Ω^k β_s ds` on the complexified side, with `α, β` the push-forwards of
/// `t1, t2` and κ the Miura curvature. The first Ω acts through β itself.
pub fn pullback_omega(kappa_hat: &RealField, t1: &EucTangent, t2: &EucTangent, k: usize) -> Result<Complex64> {
    let kappa = miura_curvature(kappa_hat);
    let alpha = tangent_map(t1);
    let beta = tangent_map(t2);
    let v = match k {
        0 => beta.ds(),
        _ => {
            let first = omega_ds(&kappa, &beta);
            omega_power(&kappa, &first, k - 1, DEFAULT_MEAN_TOL)?.value
        }
    };
    Ok((&alpha * &v).integrate())
}

/// A complex field with `mean(f) = 0` and `mean(κ̂f) = 0`, obtained from `f`
/// by removing its mean and a multiple of `κ̂ − mean(κ̂)`.
pub fn admissible_intertwine_input(kappa_hat: &RealField, f: &ComplexField) -> ComplexField {
    let f = f.add_constant(-f.mean());
    let kc = kappa_hat.add_constant(-kappa_hat.mean()).to_complex();
    let denom = (&kappa_hat.to_complex() * &kc).mean();
    if denom.norm() == 0.0 {
        return f;
    }
    let c = (&kappa_hat.to_complex() * &f).mean() / denom;
    &f - &kc.scale(c)
}

/// Grid helper: the complex field `e^{iks}`.
pub fn complex_mode(grid: &PeriodicGrid, k: f64) -> ComplexField {
    ComplexField::from_fn(grid, |s| Complex64::from_polar(1.0, k * s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eca::hierarchy::gradient_g;
    use crate::eca::level::LevelSetSpec;
    use crate::euclid::curve::euc_from_curvature;
    use crate::euclid::forms::omega_hat_k;
    use crate::euclid::hierarchy::mkdv_pairs;

    fn grid() -> PeriodicGrid {
        PeriodicGrid::new(64).unwrap()
    }

    fn field(f: impl Fn(f64) -> f64) -> RealField {
        RealField::from_fn(&grid(), f)
    }

    #[test]
    fn curvature_relation() {
        let c = |z: ComplexField, w: Complex64| z.max_abs_diff(&ComplexField::constant(&grid(), w));
        assert!(c(miura_curvature(&field(|_| 1.0)), Complex64::new(0.25, 0.0)) < 1e-15);
        assert_eq!(miura_curvature(&field(|_| 0.0)).max_abs(), 0.0);
        let got = miura_curvature(&field(|s| 1.0 + 0.2 * s.cos()));
        let want = ComplexField::from_fn(&grid(), |s| {
            Complex64::new(0.25 + 0.1 * s.cos() + 0.005 * (1.0 + (2.0 * s).cos()), -0.1 * s.sin())
        });
        assert!(got.max_abs_diff(&want) < 1e-14);
    }

    #[test]
    fn circle_is_antiperiodic() {
        let circle = EucCurve::unit_circle(&grid(), false);
        let (curve, report) = miura_curve(&circle);
        assert!(report.antiperiodic);
        assert_eq!(report.rotation_index, 1);
        assert!(report.jump_defect < 1e-8);
        // (−ie^{is})^{-1/2} = e^{iπ/4} e^{−is/2} up to the branch sign
        let want = ComplexField::from_fn(&grid(), |s| Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4 - s / 2.0));
        assert!(curve.y.max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn even_index_curve_maps_to_eca_curve() {
        let k = RealField::from_fn(&PeriodicGrid::new(128).unwrap(), |s| 2.0 + 0.3 * (3.0 * s).cos());
        let gamma = euc_from_curvature(&k, 1e-8).unwrap();
        let (curve, report) = miura_curve(&gamma);
        assert!(!report.antiperiodic);
        assert_eq!(report.rotation_index, 2);
        assert!(report.jump_defect < 1e-8);
        assert!(curve.det_defect().max_abs() < 1e-8);
        let want = miura_curvature(&gamma.curvature());
        assert!(curve.curvature().max_abs_diff(&want) < 1e-8);
    }

    #[test]
    fn intertwining() {
        // both sides vanish; spectral roundoff grows like N², so a small grid
        let g16 = PeriodicGrid::new(16).unwrap();
        let one = RealField::constant(&g16, 1.0);
        let f = RealField::from_fn(&g16, f64::cos).to_complex();
        let r = intertwine_residual(&one, &f).unwrap();
        assert!(r < 1e-12, "{r}");
        let k = field(|s| 1.0 + 0.2 * s.cos());
        let f = field(|s| (2.0 * s).cos()).to_complex();
        assert!(intertwine_residual(&k, &f).unwrap() < 1e-9);
        assert_eq!(intertwine_residual(&k, &ComplexField::zeros(&grid())).unwrap(), 0.0);
        let g = admissible_intertwine_input(&k, &(complex_mode(&grid(), 1.0) + complex_mode(&grid(), 0.0)));
        assert!(intertwine_residual(&k, &g).unwrap() < 1e-9);
        assert!(matches!(
            intertwine_residual(&k, &ComplexField::constant(&grid(), Complex64::new(1.0, 0.0))),
            Err(Error::NonZeroMean { .. })
        ));
    }

    #[test]
    fn pullback_hamiltonians() {
        let one = field(|_| 1.0);
        assert!(pullback_hamiltonian_residual(&one, 1).unwrap().residual < 1e-14);
        let k = field(|s| 1.0 + 0.2 * s.cos());
        assert!(pullback_hamiltonian_residual(&k, 1).unwrap().residual < 1e-11);
        for m in 2..=3 {
            let r = pullback_hamiltonian_residual(&k, m).unwrap();
            assert!(r.residual < 1e-9 && r.imaginary.abs() < 1e-10, "m = {m}: {r:?}");
        }
    }

    #[test]
    fn hierarchy_fields_push_forward_to_gradients() {
        // λ_n + iμ_n = G_{n+1}(κ) with κ the Miura curvature
        let k = field(|s| 1.0 + 0.2 * s.cos() - 0.1 * (2.0 * s).sin());
        let kappa = miura_curvature(&k);
        for (n, t) in mkdv_pairs(&k, 3).unwrap().iter().enumerate() {
            let g = gradient_g(&kappa, n + 2, DEFAULT_MEAN_TOL).unwrap();
            assert!(tangent_map(t).max_abs_diff(&g) < 1e-10, "n = {}", n + 1);
        }
    }

    #[test]
    fn pulled_back_forms() {
        let k = field(|s| 1.0 + 0.2 * (2.0 * s).cos());
        let t1 = EucTangent::from_mu_projected(&k, &field(|s| s.sin() + 0.3 * (3.0 * s).cos()), 0.2).unwrap();
        let t2 = EucTangent::from_mu_projected(&k, &field(|s| (2.0 * s).cos() - 0.4 * s.sin()), -0.1).unwrap();
        for kk in 0..=1 {
            let direct = omega_hat_k(&k, &t1, &t2, kk, &LevelSetSpec::unconstrained()).unwrap();
            let pulled = pullback_omega(&k, &t1, &t2, kk).unwrap();
            assert!((pulled - Complex64::new(direct, 0.0)).norm() < 1e-10, "k = {kk}: {pulled} vs {direct}");
        }
    }
}

//! Recursion operator, KdV hierarchy, conserved densities and their gradients.
//!
//! All operators are generic over real and complex samples so that the
//! complexified hierarchy used by the Miura map shares the same code.

use crate::calculus::{PeriodicField, RealField, Scalar};
use crate::eca::curve::{EcaCurve, EcaTangent};
use crate::error::{Error, Result};

/// `Ω f = ½f_ss + 2κf + κ_s D_s^{-1} f` with the mean-zero antiderivative.
pub fn omega_op<T: Scalar>(
    kappa: &PeriodicField<T>,
    f: &PeriodicField<T>,
    mean_tol: f64,
) -> Result<PeriodicField<T>> {
    kappa.ensure_same_grid(f)?;
    let inv = f.ds_inv(mean_tol)?;
    Ok(f.ds_n(2) * 0.5 + &(kappa * f) * 2.0 + kappa.ds() * inv)
}

/// `Ω D_s g` with the antiderivative of `g_s` taken to be `g` itself:
/// `½g_sss + 2κg_s + κ_s g`.
///
/// This is the form in which Ω enters the curvature evolution
/// `κ_t = Ωα_s` and the hierarchy `κ_t = Ω^n κ_s`.
pub fn omega_ds<T: Scalar>(kappa: &PeriodicField<T>, g: &PeriodicField<T>) -> PeriodicField<T> {
    let g_s = g.ds();
    g.ds_n(3) * 0.5 + &(kappa * &g_s) * 2.0 + kappa.ds() * g
}

/// Result of [`omega_power`]: `Ω^n f` together with the mean of each
/// intermediate `Ω^k f`, `k = 0..n−1`, that was fed to `D_s^{-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaPower<T: Scalar> {
    pub value: PeriodicField<T>,
    pub means: Vec<T>,
}

pub fn omega_power<T: Scalar>(
    kappa: &PeriodicField<T>,
    f: &PeriodicField<T>,
    n: usize,
    mean_tol: f64,
) -> Result<OmegaPower<T>> {
    let mut value = f.clone();
    let mut means = Vec::with_capacity(n);
    for k in 0..n {
        means.push(value.mean());
        value = omega_op(kappa, &value, mean_tol).map_err(|e| with_step(e, k))?;
    }
    Ok(OmegaPower { value, means })
}

pub(crate) fn with_step(e: Error, k: usize) -> Error {
    match e {
        Error::NonZeroMean { mean, .. } => Error::NonZeroMean {
            mean,
            step: Some(k),
        },
        other => other,
    }
}

/// Gradient `G_m = δH_m/δκ`.
///
/// `G_1 = 1`, `G_2 = κ`, `G_3 = (3/2)κ² + ½κ_ss` and
/// `G_4 = ¼κ_ssss + (5/2)κκ_ss + (5/4)κ_s² + (5/2)κ³`; beyond that the Lenard
/// recursion `G_{m+1} = D_s^{-1} Ω D_s G_m` with the mean-zero antiderivative.
/// Every order satisfies `D_s G_{m+1} = Ω D_s G_m`.
pub fn gradient_g<T: Scalar>(
    kappa: &PeriodicField<T>,
    m: usize,
    mean_tol: f64,
) -> Result<PeriodicField<T>> {
    let k = kappa;
    match m {
        0 => Err(Error::UnsupportedOrder { order: 0 }),
        1 => Ok(PeriodicField::constant(k.grid(), T::from_f64(1.0))),
        2 => Ok(k.clone()),
        3 => Ok(&(k * k) * 1.5 + k.ds_n(2) * 0.5),
        4 => {
            let k_s = k.ds();
            let k_ss = k.ds_n(2);
            Ok(k.ds_n(4) * 0.25
                + &(k * &k_ss) * 2.5
                + &(&k_s * &k_s) * 1.25
                + &(&(k * k) * k) * 2.5)
        }
        _ => {
            let prev = gradient_g(kappa, m - 1, mean_tol)?;
            omega_ds(kappa, &prev)
                .ds_inv(mean_tol)
                .map_err(|e| with_step(e, m - 1))
        }
    }
}

/// `Ω^n κ_s = D_s G_{n+2}`, the right-hand side of the n-th KdV equation.
pub fn kdv_velocity<T: Scalar>(kappa: &PeriodicField<T>, n: usize) -> Result<PeriodicField<T>> {
    if n == 0 {
        return Ok(kappa.ds());
    }
    let g = gradient_g(kappa, n + 1, crate::calculus::DEFAULT_MEAN_TOL)?;
    Ok(omega_ds(kappa, &g))
}

/// Conserved density `h_m` for `m = 1, 2, 3`.
pub fn density<T: Scalar>(kappa: &PeriodicField<T>, m: usize) -> Result<PeriodicField<T>> {
    match m {
        1 => Ok(kappa.clone()),
        2 => Ok(&(kappa * kappa) * 0.5),
        3 => {
            let k_s = kappa.ds();
            Ok(&(&(kappa * kappa) * kappa) * 0.5 - &(&k_s * &k_s) * 0.25)
        }
        _ => Err(Error::UnsupportedOrder { order: m }),
    }
}

/// `H_m = ∫ h_m ds` for `m = 1, 2, 3`.
pub fn hamiltonian<T: Scalar>(kappa: &PeriodicField<T>, m: usize) -> Result<T> {
    Ok(density(kappa, m)?.integrate())
}

/// Hierarchy field `X_n`, encoded by `α = G_{n+1}` so that `α_s = Ω^{n−1}κ_s`.
pub fn xn_field(gamma: &EcaCurve, n: usize) -> Result<EcaTangent> {
    if n == 0 {
        return Err(Error::UnsupportedOrder { order: 0 });
    }
    let kappa = gamma.curvature();
    Ok(EcaTangent::new(gradient_g(
        &kappa,
        n + 1,
        crate::calculus::DEFAULT_MEAN_TOL,
    )?))
}

/// Curvature variation `κ_t = Ωα_s` induced by the tangent α.
pub fn curvature_variation(kappa: &RealField, t: &EcaTangent) -> Result<RealField> {
    kappa.ensure_same_grid(&t.alpha)?;
    Ok(omega_ds(kappa, &t.alpha))
}

/// `dH_m(X) = ∫ G_m · Ωα_s ds`.
pub fn differential_h(kappa: &RealField, m: usize, t: &EcaTangent) -> Result<f64> {
    let g = gradient_g(kappa, m, crate::calculus::DEFAULT_MEAN_TOL)?;
    Ok((&g * &curvature_variation(kappa, t)?).integrate())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{PeriodicGrid, DEFAULT_MEAN_TOL};
    use std::f64::consts::PI;

    fn grid() -> PeriodicGrid {
        PeriodicGrid::new(64).unwrap()
    }

    fn perturbed(eps: f64) -> RealField {
        RealField::from_fn(&grid(), |s| 1.0 + eps * s.cos())
    }

    #[test]
    fn omega_on_the_circle() {
        let g = grid();
        let one = RealField::constant(&g, 1.0);
        let cos = RealField::from_fn(&g, f64::cos);
        let out = omega_op(&one, &cos, DEFAULT_MEAN_TOL).unwrap();
        assert!(out.max_abs_diff(&(&cos * 1.5)) < 1e-13);
        assert!(matches!(
            omega_op(&one, &one, DEFAULT_MEAN_TOL),
            Err(Error::NonZeroMean { .. })
        ));
    }

    #[test]
    fn omega_of_kappa_s() {
        let eps = 0.2;
        let kappa = perturbed(eps);
        let want = RealField::from_fn(&grid(), |s| {
            -2.5 * eps * s.sin() - 1.5 * eps * eps * (2.0 * s).sin()
        });
        assert!(omega_ds(&kappa, &kappa).max_abs_diff(&want) < 1e-12);
        assert!(kdv_velocity(&kappa, 1).unwrap().max_abs_diff(&want) < 1e-12);
        // the mean-zero operator differs by mean(κ)·κ_s
        let mz = omega_op(&kappa, &kappa.ds(), DEFAULT_MEAN_TOL).unwrap();
        assert!(mz.max_abs_diff(&(want - kappa.ds())) < 1e-12);
    }

    #[test]
    fn omega_powers() {
        let g = grid();
        let one = RealField::constant(&g, 1.0);
        let cos = RealField::from_fn(&g, f64::cos);
        let p = omega_power(&one, &cos, 2, DEFAULT_MEAN_TOL).unwrap();
        // each Ω applies D_s² to roundoff in the top modes
        assert!(p.value.max_abs_diff(&(&cos * 2.25)) < 1e-10);
        assert_eq!(p.means.len(), 2);
        let zero = RealField::zeros(&g);
        assert_eq!(omega_power(&one, &zero, 5, DEFAULT_MEAN_TOL).unwrap().value.max_abs(), 0.0);

        let kappa = perturbed(0.2);
        let f = kappa.ds();
        let twice = omega_op(&kappa, &omega_op(&kappa, &f, DEFAULT_MEAN_TOL).unwrap(), DEFAULT_MEAN_TOL)
            .unwrap();
        let p = omega_power(&kappa, &f, 2, DEFAULT_MEAN_TOL).unwrap();
        assert_eq!(p.value, twice);
        assert_eq!(p.means[0], f.mean());

        match omega_power(&one, &(&cos + &one), 2, DEFAULT_MEAN_TOL) {
            Err(Error::NonZeroMean { step: Some(0), .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn gradient_examples() {
        let kappa = perturbed(0.2);
        let g1 = gradient_g(&kappa, 1, DEFAULT_MEAN_TOL).unwrap();
        assert_eq!(g1.max_abs_diff(&RealField::constant(&grid(), 1.0)), 0.0);
        let want = RealField::from_fn(&grid(), |s| {
            1.5 * (1.0 + 0.2 * s.cos()).powi(2) - 0.1 * s.cos()
        });
        assert!(gradient_g(&kappa, 3, DEFAULT_MEAN_TOL).unwrap().max_abs_diff(&want) < 1e-12);
        assert!(matches!(
            gradient_g(&kappa, 0, DEFAULT_MEAN_TOL),
            Err(Error::UnsupportedOrder { order: 0 })
        ));
    }

    #[test]
    fn lenard_recursion_holds_for_all_orders() {
        let kappa = RealField::from_fn(&grid(), |s| 1.0 + 0.2 * s.cos() - 0.1 * (2.0 * s).sin());
        for m in 1..=5 {
            let lhs = gradient_g(&kappa, m + 1, DEFAULT_MEAN_TOL).unwrap().ds();
            let rhs = omega_ds(&kappa, &gradient_g(&kappa, m, DEFAULT_MEAN_TOL).unwrap());
            // high-order spectral derivatives amplify roundoff like k^(2m)
            let tol = if m <= 3 { 1e-10 } else { 1e-8 };
            assert!(lhs.max_abs_diff(&rhs) < tol * (1.0 + rhs.max_abs()), "m = {m}");
        }
    }

    #[test]
    fn hamiltonian_values() {
        let g = grid();
        let one = RealField::constant(&g, 1.0);
        assert!((hamiltonian(&one, 1).unwrap() - 2.0 * PI).abs() < 1e-13);
        assert!((hamiltonian(&one, 2).unwrap() - PI).abs() < 1e-13);
        assert!((hamiltonian(&one, 3).unwrap() - PI).abs() < 1e-13);
        let kappa = perturbed(0.2);
        assert!((hamiltonian(&kappa, 1).unwrap() - 2.0 * PI).abs() < 1e-13);
        assert!((hamiltonian(&kappa, 2).unwrap() - PI * 1.02).abs() < 1e-13);
        assert!(matches!(hamiltonian(&kappa, 4), Err(Error::UnsupportedOrder { order: 4 })));
    }

    #[test]
    fn gradients_are_variational_derivatives() {
        // dH_m/dε along κ + ε v equals ∫ G_m v
        let kappa = RealField::from_fn(&grid(), |s| 1.0 + 0.3 * s.cos() + 0.1 * (3.0 * s).sin());
        let v = RealField::from_fn(&grid(), |s| (2.0 * s).cos() + 0.5 * s.sin());
        let h = 1e-4;
        for m in 1..=3 {
            let fd = (hamiltonian(&(&kappa + &(&v * h)), m).unwrap()
                - hamiltonian(&(&kappa - &(&v * h)), m).unwrap())
                / (2.0 * h);
            let exact = (&gradient_g(&kappa, m, DEFAULT_MEAN_TOL).unwrap() * &v).integrate();
            assert!((fd - exact).abs() < 1e-7 * (1.0 + exact.abs()), "m = {m}");
        }
    }

    #[test]
    fn differential_h_examples() {
        let g = grid();
        let one = RealField::constant(&g, 1.0);
        let t = EcaTangent::new(RealField::from_fn(&g, |s| s.sin() + (3.0 * s).cos()));
        assert!(differential_h(&one, 1, &t).unwrap().abs() < 1e-13);
        let kappa = perturbed(0.2);
        let t = EcaTangent::new(RealField::from_fn(&g, f64::sin));
        assert!((differential_h(&kappa, 1, &t).unwrap() - 0.2 * PI).abs() < 1e-13);
    }

    #[test]
    fn differential_h_matches_finite_differences() {
        let kappa = perturbed(0.2);
        let t = EcaTangent::new(RealField::from_fn(&grid(), |s| s.sin() + 0.3 * (2.0 * s).cos()));
        let v = curvature_variation(&kappa, &t).unwrap();
        let h = 1e-5;
        for m in 1..=3 {
            let fd = (hamiltonian(&(&kappa + &(&v * h)), m).unwrap()
                - hamiltonian(&(&kappa - &(&v * h)), m).unwrap())
                / (2.0 * h);
            let exact = differential_h(&kappa, m, &t).unwrap();
            assert!((fd - exact).abs() <= 1e-7 * (1.0 + exact.abs()), "m = {m}: {fd} vs {exact}");
        }
    }
}

//! Property tests over random band-limited inputs.

use kdvcurves::eca::level::LevelSetSpec;
use kdvcurves::eca::{hamiltonian, omega0, omega_k, sl2_apply, EcaCurve, EcaTangent};
use kdvcurves::euclid::curve::{e2_apply, euc_from_curvature, rotation};
use kdvcurves::io::{from_json_str, to_json_string, CurveData, FieldData};
use kdvcurves::miura::{admissible_intertwine_input, intertwine_sides, miura_curvature};
use kdvcurves::plane::Mat2;
use kdvcurves::seeds::{random_band_limited, random_complex_band_limited, rng_from_seed};
use kdvcurves::{PeriodicGrid, RealField};
use num_complex::Complex64;
use proptest::prelude::*;

fn grid(n: usize) -> PeriodicGrid {
    PeriodicGrid::new(n).unwrap()
}

fn random(n: usize, seed: u64, mean: f64, amp: f64) -> RealField {
    random_band_limited(&grid(n), &mut rng_from_seed(seed), n / 4, mean, amp)
}

fn sizes() -> impl Strategy<Value = usize> {
    prop::sample::select(vec![16usize, 32, 64, 128])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn integration_by_parts(n in sizes(), seed in any::<u64>()) {
        let f = random(n, seed, 0.3, 1.0);
        let g = random(n, seed ^ 0x5555, -0.7, 1.0);
        let lhs = (&f * &g.ds()).integrate();
        let rhs = -(&f.ds() * &g).integrate();
        prop_assert!((lhs - rhs).abs() <= 1e-11);
    }

    #[test]
    fn antiderivative_inverts_derivative(n in sizes(), seed in any::<u64>()) {
        let f = random(n, seed, 0.0, 1.0);
        let back = f.ds().ds_inv(1e-12).unwrap();
        prop_assert!(back.max_abs_diff(&f) <= 1e-12);
        let fwd = f.ds_inv(1e-12).unwrap().ds();
        prop_assert!(fwd.max_abs_diff(&f) <= 1e-12);
    }

    #[test]
    fn omega0_is_skew(seed in any::<u64>()) {
        let a = EcaTangent::new(random(64, seed, 0.0, 1.0));
        let b = EcaTangent::new(random(64, seed.wrapping_add(1), 0.0, 1.0));
        let ab = omega0(&a, &b).unwrap();
        let ba = omega0(&b, &a).unwrap();
        prop_assert!((ab + ba).abs() <= 1e-12 * (1.0 + ab.abs()));
    }

    #[test]
    fn omega1_is_skew(seed in any::<u64>(), eps in 0.0..0.3f64) {
        let kappa = RealField::from_fn(&grid(64), |s| 1.0 + eps * s.cos());
        let a = EcaTangent::new(random(64, seed, 0.0, 1.0));
        let b = EcaTangent::new(random(64, seed.wrapping_add(1), 0.0, 1.0));
        let free = LevelSetSpec::unconstrained();
        let ab = omega_k(&kappa, &a, &b, 1, &free).unwrap();
        let ba = omega_k(&kappa, &b, &a, 1, &free).unwrap();
        prop_assert!((ab + ba).abs() <= 1e-10 * (1.0 + ab.abs()));
    }

    #[test]
    fn curvature_is_sl2_invariant(theta in 0.0..6.3f64, stretch in 0.5..2.0f64, shear in -1.0..1.0f64) {
        let g = grid(128);
        let gamma = EcaCurve::from_polar(&g, |t| 1.0 + 0.05 * (3.0 * t).cos()).unwrap();
        let (c, s) = (theta.cos(), theta.sin());
        let r: Mat2 = [[c, -s], [s, c]];
        let d: Mat2 = [[stretch, 0.0], [0.0, 1.0 / stretch]];
        let h: Mat2 = [[1.0, shear], [0.0, 1.0]];
        let a = kdvcurves::plane::mat_mul(&kdvcurves::plane::mat_mul(&r, &d), &h);
        let moved = sl2_apply(&a, &gamma).unwrap();
        prop_assert!(moved.curvature().max_abs_diff(&gamma.curvature()) <= 1e-9);
    }

    #[test]
    fn euclidean_curvature_is_e2_invariant(theta in 0.0..6.3f64, vx in -5.0..5.0f64, vy in -5.0..5.0f64) {
        let k = RealField::from_fn(&grid(128), |s| 1.0 + 0.2 * (2.0 * s).cos());
        let curve = euc_from_curvature(&k, 1e-8).unwrap();
        let moved = e2_apply(&rotation(theta), [vx, vy], &curve).unwrap();
        prop_assert!(moved.curvature().max_abs_diff(&curve.curvature()) <= 1e-10);
    }

    #[test]
    fn miura_hamiltonians_are_real(seed in any::<u64>()) {
        // ∫h_m(κ̂²/4 + iκ̂_s/2) has no imaginary part for m = 1..3
        let kh = random(64, seed, 1.0, 0.3);
        let kappa = miura_curvature(&kh);
        for m in 1..=3 {
            let h = hamiltonian(&kappa, m).unwrap();
            prop_assert!(h.im.abs() <= 1e-10 * (1.0 + h.norm()), "m = {}: {}", m, h);
        }
    }

    #[test]
    fn intertwining_holds(seed in any::<u64>(), n in prop::sample::select(vec![32usize, 64])) {
        let g = grid(n);
        let mut rng = rng_from_seed(seed);
        let kh = random_band_limited(&g, &mut rng, n / 4, 1.0, 0.5);
        let raw = random_complex_band_limited(&g, &mut rng, n / 4, Complex64::new(0.0, 0.0), 1.0);
        let f = admissible_intertwine_input(&kh, &raw);
        let (lhs, rhs) = intertwine_sides(&kh, &f).unwrap();
        let scale = 1.0 + lhs.max_abs().max(rhs.max_abs());
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-9 * scale);
    }

    #[test]
    fn field_json_round_trips_bit_exactly(samples in prop::collection::vec(
        prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO, 1..40)) {
        let data = FieldData { n: samples.len(), samples };
        let text = to_json_string(&data);
        let back: FieldData = from_json_str(&text, "prop").unwrap();
        prop_assert_eq!(back.n, data.n);
        for (a, b) in back.samples.iter().zip(&data.samples) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn curve_json_round_trips_bit_exactly(seed in any::<u64>()) {
        let x = random(32, seed, 0.0, 1.0);
        let y = random(32, !seed, 0.0, 1.0);
        let data = CurveData { n: 32, x: x.samples().to_vec(), y: y.samples().to_vec() };
        let back: CurveData = from_json_str(&to_json_string(&data), "prop").unwrap();
        prop_assert_eq!(back, data);
    }
}

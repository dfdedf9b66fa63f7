use std::ffi::{CStr, CString};
use std::f64::consts::PI;
use std::ptr;

use kdvcurves_ffi::*;

fn make_field(samples: &[f64]) -> *mut KcField {
    let mut f = ptr::null_mut();
    assert_eq!(unsafe { kc_field_new(samples.len(), samples.as_ptr(), &mut f) }, KcStatus::Ok);
    f
}

fn sampled(n: usize, f: impl Fn(f64) -> f64) -> Vec<f64> {
    (0..n).map(|j| f(2.0 * PI * j as f64 / n as f64)).collect()
}

fn last_error() -> String {
    let p = kc_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned()
}

#[test]
fn field_round_trip_and_errors() {
    let s = sampled(16, |s| 1.0 + s.cos());
    let f = make_field(&s);
    assert!(kc_last_error_message().is_null());
    assert_eq!(unsafe { kc_field_len(f) }, 16);
    let mut back = vec![0.0; 16];
    assert_eq!(unsafe { kc_field_copy(f, back.as_mut_ptr(), 16) }, KcStatus::Ok);
    assert_eq!(back, s);
    assert_eq!(unsafe { kc_field_copy(f, back.as_mut_ptr(), 8) }, KcStatus::InvalidArgument);
    unsafe { kc_field_free(f) };

    let mut g = ptr::null_mut();
    assert_eq!(unsafe { kc_field_new(7, s.as_ptr(), &mut g) }, KcStatus::InvalidArgument);
    assert!(last_error().contains("invalid grid"));
    assert!(g.is_null());
    assert_eq!(unsafe { kc_field_new(16, ptr::null(), &mut g) }, KcStatus::NullPointer);
    let bad = [f64::NAN; 8];
    assert_eq!(unsafe { kc_field_new(8, bad.as_ptr(), &mut g) }, KcStatus::InvalidArgument);
    // null handles are tolerated by the free and length functions
    unsafe { kc_field_free(ptr::null_mut()) };
    assert_eq!(unsafe { kc_field_len(ptr::null()) }, 0);
}

#[test]
fn hamiltonians_of_constant_curvature() {
    let f = make_field(&[1.0; 32]);
    let mut h = 0.0;
    // ∫κ ds over [0, 2π) with κ ≡ 1
    assert_eq!(unsafe { kc_hamiltonian(f, KcGeometry::Eca, 1, &mut h) }, KcStatus::Ok);
    assert!((h - 2.0 * PI).abs() < 1e-12);
    assert_eq!(unsafe { kc_hamiltonian(f, KcGeometry::Euclidean, 1, &mut h) }, KcStatus::Ok);
    // ∫κ̂²/4 ds
    assert!((h - PI / 2.0).abs() < 1e-12);
    assert_eq!(unsafe { kc_hamiltonian(f, KcGeometry::Eca, 4, &mut h) }, KcStatus::UnsupportedOrder);
    unsafe { kc_field_free(f) };
}

#[test]
fn omega0_of_sine_and_cosine() {
    let n = 32;
    let kappa = make_field(&[1.0; 32]);
    let a = make_field(&sampled(n, f64::sin));
    let b = make_field(&sampled(n, f64::cos));
    let mut w = 0.0;
    // ∫ sin · (cos)_s = −π
    assert_eq!(unsafe { kc_omega(kappa, a, b, 0, &mut w) }, KcStatus::Ok);
    assert!((w + PI).abs() < 1e-12, "{w}");
    let mut w2 = 0.0;
    assert_eq!(unsafe { kc_omega(kappa, b, a, 0, &mut w2) }, KcStatus::Ok);
    assert!((w + w2).abs() < 1e-12);
    unsafe {
        kc_field_free(kappa);
        kc_field_free(a);
        kc_field_free(b);
    }
}

#[test]
fn curves_reconstruct_from_curvature() {
    let n = 64;
    let k = make_field(&sampled(n, |s| 1.0 + 0.2 * (2.0 * s).cos()));
    let mut c = ptr::null_mut();
    assert_eq!(unsafe { kc_euc_curve_from_curvature(k, 1e-8, &mut c) }, KcStatus::Ok);
    let mut kc = ptr::null_mut();
    assert_eq!(unsafe { kc_euc_curve_curvature(c, &mut kc) }, KcStatus::Ok);
    let (mut a, mut b) = (vec![0.0; n], vec![0.0; n]);
    unsafe {
        kc_field_copy(k, a.as_mut_ptr(), n);
        kc_field_copy(kc, b.as_mut_ptr(), n);
    }
    assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-8));
    let (mut x, mut y) = (vec![0.0; n], vec![0.0; n]);
    assert_eq!(unsafe { kc_euc_curve_copy(c, x.as_mut_ptr(), y.as_mut_ptr(), n) }, KcStatus::Ok);
    let mut again = ptr::null_mut();
    assert_eq!(unsafe { kc_euc_curve_new(n, x.as_ptr(), y.as_ptr(), 1e-8, &mut again) }, KcStatus::Ok);
    unsafe {
        kc_euc_curve_free(again);
        kc_euc_curve_free(c);
        kc_field_free(kc);
        kc_field_free(k);
    }

    // the unit circle has equicentroaffine curvature 1
    let one = make_field(&vec![1.0; n]);
    let mut e = ptr::null_mut();
    assert_eq!(unsafe { kc_eca_curve_from_curvature(one, 1e-8, &mut e) }, KcStatus::Ok);
    assert_eq!(unsafe { kc_eca_curve_copy(e, x.as_mut_ptr(), y.as_mut_ptr(), n) }, KcStatus::Ok);
    assert!(x.iter().zip(&y).all(|(a, b)| (a.hypot(*b) - 1.0).abs() < 1e-8));
    let mut e2 = ptr::null_mut();
    assert_eq!(unsafe { kc_eca_curve_new(n, x.as_ptr(), y.as_ptr(), 1e-8, &mut e2) }, KcStatus::Ok);
    let scaled: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
    let mut bad = ptr::null_mut();
    assert_eq!(unsafe { kc_eca_curve_new(n, scaled.as_ptr(), y.as_ptr(), 1e-8, &mut bad) }, KcStatus::InvalidCurve);
    unsafe {
        kc_eca_curve_free(e2);
        kc_eca_curve_free(e);
        kc_field_free(one);
    }

    // κ ≡ 1/4: monodromy −I, no closed curve
    let quarter = make_field(&vec![0.25; n]);
    assert_eq!(unsafe { kc_eca_curve_from_curvature(quarter, 1e-8, &mut e) }, KcStatus::NotClosed);
    assert!(last_error().contains("does not close up"));
    unsafe { kc_field_free(quarter) };
}

#[test]
fn evolution_conserves_hamiltonians() {
    let k = make_field(&sampled(64, |s| 1.0 + 0.2 * s.cos()));
    let mut t = ptr::null_mut();
    assert_eq!(unsafe { kc_evolve(k, KcGeometry::Eca, 1, 0.01, 1e-4, true, 50, &mut t) }, KcStatus::Ok);
    let len = unsafe { kc_trajectory_len(t) };
    assert_eq!(len, 3);
    let (mut time, mut snap) = (0.0, ptr::null_mut());
    assert_eq!(unsafe { kc_trajectory_snapshot(t, len - 1, &mut time, &mut snap) }, KcStatus::Ok);
    assert!((time - 0.01).abs() < 1e-12);
    for m in 1..=3 {
        let mut d = 1.0;
        assert_eq!(unsafe { kc_trajectory_drift(t, m, &mut d) }, KcStatus::Ok);
        assert!(d < 1e-8, "H{m}: {d}");
    }
    assert_eq!(unsafe { kc_trajectory_snapshot(t, len, &mut time, &mut snap) }, KcStatus::InvalidArgument);
    unsafe {
        kc_field_free(snap);
        kc_trajectory_free(t);
    }
    let mut t2 = ptr::null_mut();
    assert_eq!(unsafe { kc_evolve(k, KcGeometry::Eca, 1, 0.01, 0.1, false, 0, &mut t2) }, KcStatus::Stability);
    assert!(t2.is_null());
    unsafe { kc_field_free(k) };
}

#[test]
fn miura_curvature_parts() {
    let n = 32;
    let kh = make_field(&sampled(n, |s| 1.0 + 0.2 * s.cos()));
    let (mut re, mut im) = (ptr::null_mut(), ptr::null_mut());
    assert_eq!(unsafe { kc_miura_curvature(kh, &mut re, &mut im) }, KcStatus::Ok);
    let (mut a, mut b) = (vec![0.0; n], vec![0.0; n]);
    unsafe {
        kc_field_copy(re, a.as_mut_ptr(), n);
        kc_field_copy(im, b.as_mut_ptr(), n);
    }
    for (j, s) in sampled(n, |s| s).into_iter().enumerate() {
        let k = 1.0 + 0.2 * s.cos();
        assert!((a[j] - k * k / 4.0).abs() < 1e-14);
        assert!((b[j] + 0.1 * s.sin()).abs() < 1e-12);
    }
    unsafe {
        kc_field_free(re);
        kc_field_free(im);
        kc_field_free(kh);
    }
}

#[test]
fn check_suites_through_json() {
    let cfg = CString::new(r#"{"schema_version": 1, "n_points": 64, "seed": 5, "trials": 4, "kappa": {"constant": 1.0}}"#).unwrap();
    let (mut out, mut pass) = (ptr::null_mut(), false);
    assert_eq!(unsafe { kc_run_checks(cfg.as_ptr(), ptr::null(), &mut out, &mut pass) }, KcStatus::Ok);
    assert!(pass);
    let json = unsafe { CStr::from_ptr(out) }.to_str().unwrap().to_owned();
    assert!(json.contains("calculus.integration_by_parts"));
    unsafe { kc_string_free(out) };

    let bad = CString::new(r#"{"schema_version": 9, "n_points": 64}"#).unwrap();
    assert_eq!(unsafe { kc_run_checks(bad.as_ptr(), ptr::null(), &mut out, &mut pass) }, KcStatus::InvalidArgument);
    assert!(last_error().contains("schema_version"));
}

#[test]
fn errors_are_thread_local() {
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { kc_field_new(3, [0.0; 3].as_ptr(), &mut g) }, KcStatus::InvalidArgument);
    std::thread::spawn(|| assert!(kc_last_error_message().is_null())).join().unwrap();
    assert!(!kc_last_error_message().is_null());
}

#[test]
fn version_is_set() {
    let v = unsafe { CStr::from_ptr(kc_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

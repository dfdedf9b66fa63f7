//! C interface to `kdvcurves`.
//!
//! Objects cross the boundary as opaque handles created by `kc_*_new` or
//! returned through out-pointers, and released with the matching `kc_*_free`.
//! Every fallible call returns a [`KcStatus`]; on failure the thread-local
//! message from [`kc_last_error_message`] describes the cause. Panics never
//! unwind into C: they are caught and reported as `KC_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use kdvcurves::checks::CheckReport;
use kdvcurves::cli::{check_report, load, CheckConfig};
use kdvcurves::eca::level::LevelSetSpec;
use kdvcurves::eca::{eca_from_curvature, hamiltonian, omega_k, EcaCurve, EcaTangent, DEFAULT_SUBSTEPS};
use kdvcurves::euclid::curve::{euc_from_curvature, EucCurve};
use kdvcurves::euclid::hierarchy::hamiltonian_hat;
use kdvcurves::flow::{evolve, FlowSpec, FlowState, Model, Representation, Scheme, TrajectoryRecord};
use kdvcurves::io::to_json_string;
use kdvcurves::miura::miura_curvature;
use kdvcurves::{Error, PeriodicGrid, RealField};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KcStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Bad grid size, length, non-finite sample, or malformed configuration.
    InvalidArgument = 2,
    /// An antiderivative was requested of a function with non-zero mean.
    NonZeroMean = 3,
    /// A tangent vector violates its linearized constraint or level set.
    NotTangent = 4,
    UnsupportedOrder = 5,
    /// The curvature does not close up into a periodic curve.
    NotClosed = 6,
    /// Samples do not describe a valid curve of the requested geometry.
    InvalidCurve = 7,
    Stability = 8,
    Blowup = 9,
    ConstraintDrift = 10,
    /// A group element or constraint system is degenerate.
    Degenerate = 11,
    Io = 12,
    Panic = 13,
}

impl From<&Error> for KcStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidGrid { .. }
            | Error::LengthMismatch { .. }
            | Error::NonFinite { .. }
            | Error::GridMismatch { .. }
            | Error::InvalidSpec(_)
            | Error::Config(_) => KcStatus::InvalidArgument,
            Error::NonZeroMean { .. } => KcStatus::NonZeroMean,
            Error::NotTangent { .. } | Error::NotLevelTangent { .. } | Error::NotOnLevelSet { .. } => {
                KcStatus::NotTangent
            }
            Error::UnsupportedOrder { .. } => KcStatus::UnsupportedOrder,
            Error::NotClosed(_) => KcStatus::NotClosed,
            Error::InvalidCurve { .. } | Error::CurveThroughOrigin { .. } => KcStatus::InvalidCurve,
            Error::Stability { .. } => KcStatus::Stability,
            Error::Blowup { .. } => KcStatus::Blowup,
            Error::ConstraintDrift { .. } => KcStatus::ConstraintDrift,
            Error::DegenerateConstraint { .. }
            | Error::NotUnimodular { .. }
            | Error::NotTraceFree { .. }
            | Error::NotOrthogonal { .. } => KcStatus::Degenerate,
            Error::Io { .. } | Error::Parse { .. } => KcStatus::Io,
        }
    }
}

/// Geometry selector for flows and Hamiltonians.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KcGeometry {
    /// Equicentroaffine curvature, KdV hierarchy.
    Eca = 0,
    /// Euclidean curvature, mKdV hierarchy.
    Euclidean = 1,
}

/// Real periodic field sampled on a uniform grid of `[0, 2π)`.
pub struct KcField(RealField);

/// Closed curve with `det(γ, γ_s) = 1`.
pub struct KcEcaCurve(EcaCurve);

/// Closed unit-speed curve.
pub struct KcEucCurve(EucCurve);

/// Result of a curvature flow run.
pub struct KcTrajectory(TrajectoryRecord);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Run `f`, translating errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), (KcStatus, String)>) -> KcStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => KcStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            KcStatus::Panic
        }
    }
}

fn lib(e: Error) -> (KcStatus, String) {
    (KcStatus::from(&e), e.to_string())
}

fn null(what: &str) -> (KcStatus, String) {
    (KcStatus::NullPointer, format!("{what} is null"))
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, (KcStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], (KcStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn store<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

unsafe fn copy_out(src: &[f64], out: *mut f64, len: usize) -> Result<(), (KcStatus, String)> {
    if out.is_null() {
        return Err(null("output buffer"));
    }
    if len != src.len() {
        return Err((KcStatus::InvalidArgument, format!("buffer holds {len} values, need {}", src.len())));
    }
    std::slice::from_raw_parts_mut(out, len).copy_from_slice(src);
    Ok(())
}

fn field(n: usize, samples: &[f64]) -> Result<RealField, (KcStatus, String)> {
    let grid = PeriodicGrid::new(n).map_err(lib)?;
    RealField::new(&grid, samples.to_vec()).map_err(lib)
}

/// Message describing the last failure on this thread, or null if the last
/// call succeeded. The pointer stays valid until the next `kc_*` call on the
/// same thread.
#[no_mangle]
pub extern "C" fn kc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn kc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Create a field from `n` samples at `s_j = 2πj/n`. `n` must be even and ≥ 8.
///
/// # Safety
/// `samples` must point to `n` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kc_field_new(n: usize, samples: *const f64, out: *mut *mut KcField) -> KcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let f = field(n, slice(samples, n, "samples")?)?;
        store(out, KcField(f));
        Ok(())
    })
}

/// # Safety
/// `f` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kc_field_free(f: *mut KcField) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Number of samples, or 0 for a null handle.
///
/// # Safety
/// `f` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn kc_field_len(f: *const KcField) -> usize {
    f.as_ref().map_or(0, |f| f.0.n_points())
}

/// Copy the samples into `out`, which must hold exactly `kc_field_len(f)` values.
///
/// # Safety
/// `f` must be a live handle; `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn kc_field_copy(f: *const KcField, out: *mut f64, len: usize) -> KcStatus {
    guard(|| copy_out(borrow(f, "field")?.0.samples(), out, len))
}

/// Conserved quantity `H_m` (`m` = 1, 2, 3) of a curvature in the given geometry.
///
/// # Safety
/// `kappa` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kc_hamiltonian(kappa: *const KcField, geometry: KcGeometry, m: usize, out: *mut f64) -> KcStatus {
    guard(|| {
        let k = &borrow(kappa, "kappa")?.0;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = match geometry {
            KcGeometry::Eca => hamiltonian(k, m),
            KcGeometry::Euclidean => hamiltonian_hat(k, m),
        }
        .map_err(lib)?;
        Ok(())
    })
}

/// Presymplectic form `ω_k(α₁, α₂)` at curvature `kappa` on equicentroaffine
/// tangents. For `k ≥ 2` the second tangent must be tangent to the level set
/// through `kappa`.
///
/// # Safety
/// All handles must be live and on one grid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kc_omega(
    kappa: *const KcField,
    alpha1: *const KcField,
    alpha2: *const KcField,
    k: usize,
    out: *mut f64,
) -> KcStatus {
    guard(|| {
        let kappa = &borrow(kappa, "kappa")?.0;
        let t1 = EcaTangent::new(borrow(alpha1, "alpha1")?.0.clone());
        let t2 = EcaTangent::new(borrow(alpha2, "alpha2")?.0.clone());
        if out.is_null() {
            return Err(null("out"));
        }
        let level = if k >= 2 {
            LevelSetSpec::through(kappa, k - 1).map_err(lib)?
        } else {
            LevelSetSpec::unconstrained()
        };
        *out = omega_k(kappa, &t1, &t2, k, &level).map_err(lib)?;
        Ok(())
    })
}

/// Miura curvature `κ̂²/4 + iκ̂_s/2`, returned as real and imaginary parts.
///
/// # Safety
/// `kappa_hat` must be a live handle; both out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn kc_miura_curvature(
    kappa_hat: *const KcField,
    out_re: *mut *mut KcField,
    out_im: *mut *mut KcField,
) -> KcStatus {
    guard(|| {
        let kh = &borrow(kappa_hat, "kappa_hat")?.0;
        if out_re.is_null() || out_im.is_null() {
            return Err(null("out"));
        }
        let k = miura_curvature(kh);
        store(out_re, KcField(k.re()));
        store(out_im, KcField(k.im()));
        Ok(())
    })
}

/// Equicentroaffine curve from `n` samples of each coordinate; validated
/// against `det(γ, γ_s) = 1` to `det_tol`.
///
/// # Safety
/// `x` and `y` must each point to `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kc_eca_curve_new(
    n: usize,
    x: *const f64,
    y: *const f64,
    det_tol: f64,
    out: *mut *mut KcEcaCurve,
) -> KcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let c = EcaCurve::new(field(n, slice(x, n, "x")?)?, field(n, slice(y, n, "y")?)?).map_err(lib)?;
        let report = c.validate(det_tol);
        if !report.ok {
            return Err(lib(Error::InvalidCurve { defect: report.max_det_defect, tolerance: det_tol }));
        }
        store(out, KcEcaCurve(c));
        Ok(())
    })
}

/// Reconstruct the closed curve with curvature `kappa` (solving Hill's
/// equation); `KC_STATUS_NOT_CLOSED` if the monodromy misses the identity by more
/// than `closure_tol`.
///
/// # Safety
/// `kappa` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kc_eca_curve_from_curvature(
    kappa: *const KcField,
    closure_tol: f64,
    out: *mut *mut KcEcaCurve,
) -> KcStatus {
    guard(|| {
        let k = &borrow(kappa, "kappa")?.0;
        if out.is_null() {
            return Err(null("out"));
        }
        store(out, KcEcaCurve(eca_from_curvature(k, closure_tol, DEFAULT_SUBSTEPS).map_err(lib)?));
        Ok(())
    })
}

/// # Safety
/// `c` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kc_eca_curve_curvature(c: *const KcEcaCurve, out: *mut *mut KcField) -> KcStatus {
    guard(|| {
        let c = &borrow(c, "curve")?.0;
        if out.is_null() {
            return Err(null("out"));
        }
        store(out, KcField(c.curvature()));
        Ok(())
    })
}

/// Copy the coordinates into `x` and `y`, each holding `len` = point count values.
///
/// # Safety
/// `c` must be a live handle; `x` and `y` must each point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn kc_eca_curve_copy(c: *const KcEcaCurve, x: *mut f64, y: *mut f64, len: usize) -> KcStatus {
    guard(|| {
        let c = &borrow(c, "curve")?.0;
        copy_out(c.x().samples(), x, len)?;
        copy_out(c.y().samples(), y, len)
    })
}

/// # Safety
/// `c` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn kc_eca_curve_free(c: *mut KcEcaCurve) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Unit-speed curve from `n` samples of each coordinate; validated against
/// `|γ̂_s| = 1` to `speed_tol`.
///
/// # Safety
/// `x` and `y` must each point to `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kc_euc_curve_new(
    n: usize,
    x: *const f64,
    y: *const f64,
    speed_tol: f64,
    out: *mut *mut KcEucCurve,
) -> KcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let c = EucCurve::new(field(n, slice(x, n, "x")?)?, field(n, slice(y, n, "y")?)?).map_err(lib)?;
        let report = c.validate(speed_tol);
        if !report.ok {
            return Err(lib(Error::InvalidCurve { defect: report.max_speed_defect, tolerance: speed_tol }));
        }
        store(out, KcEucCurve(c));
        Ok(())
    })
}

/// Integrate the turning angle of `kappa_hat`; `KC_STATUS_NOT_CLOSED` if the result
/// does not close within `closure_tol` or winds a non-integer number of times.
///
/// # Safety
/// `kappa_hat` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kc_euc_curve_from_curvature(
    kappa_hat: *const KcField,
    closure_tol: f64,
    out: *mut *mut KcEucCurve,
) -> KcStatus {
    guard(|| {
        let k = &borrow(kappa_hat, "kappa_hat")?.0;
        if out.is_null() {
            return Err(null("out"));
        }
        store(out, KcEucCurve(euc_from_curvature(k, closure_tol).map_err(lib)?));
        Ok(())
    })
}

/// # Safety
/// `c` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kc_euc_curve_curvature(c: *const KcEucCurve, out: *mut *mut KcField) -> KcStatus {
    guard(|| {
        let c = &borrow(c, "curve")?.0;
        if out.is_null() {
            return Err(null("out"));
        }
        store(out, KcField(c.curvature()));
        Ok(())
    })
}

/// # Safety
/// `c` must be a live handle; `x` and `y` must each point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn kc_euc_curve_copy(c: *const KcEucCurve, x: *mut f64, y: *mut f64, len: usize) -> KcStatus {
    guard(|| {
        let c = &borrow(c, "curve")?.0;
        copy_out(c.x().samples(), x, len)?;
        copy_out(c.y().samples(), y, len)
    })
}

/// # Safety
/// `c` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn kc_euc_curve_free(c: *mut KcEucCurve) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Evolve a curvature under the `n`-th KdV (`KC_GEOMETRY_ECA`) or mKdV
/// (`KC_GEOMETRY_EUCLIDEAN`) flow. `stiff` selects the integrating-factor
/// scheme with dealiasing; otherwise classical RK4. A snapshot is kept every
/// `record_every` steps (0 keeps only the endpoints).
///
/// # Safety
/// `kappa0` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kc_evolve(
    kappa0: *const KcField,
    geometry: KcGeometry,
    n: usize,
    t_final: f64,
    dt: f64,
    stiff: bool,
    record_every: usize,
    out: *mut *mut KcTrajectory,
) -> KcStatus {
    guard(|| {
        let k = &borrow(kappa0, "kappa0")?.0;
        if out.is_null() {
            return Err(null("out"));
        }
        let model = match geometry {
            KcGeometry::Eca => Model::Eca,
            KcGeometry::Euclidean => Model::Euclidean,
        };
        let mut spec = FlowSpec::new(model, Representation::Curvature, n, t_final, dt)
            .with_scheme(if stiff { Scheme::STIFF } else { Scheme::RK4 });
        if record_every > 0 {
            spec = spec.with_record_every(record_every);
        }
        let rec = evolve(&FlowState::Curvature(k.clone()), &spec).map_err(lib)?;
        store(out, KcTrajectory(rec));
        Ok(())
    })
}

/// Number of stored snapshots, or 0 for a null handle.
///
/// # Safety
/// `t` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn kc_trajectory_len(t: *const KcTrajectory) -> usize {
    t.as_ref().map_or(0, |t| t.0.states.len())
}

/// Time and curvature of snapshot `index`.
///
/// # Safety
/// `t` must be a live handle; out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn kc_trajectory_snapshot(
    t: *const KcTrajectory,
    index: usize,
    time: *mut f64,
    out: *mut *mut KcField,
) -> KcStatus {
    guard(|| {
        let rec = &borrow(t, "trajectory")?.0;
        if time.is_null() || out.is_null() {
            return Err(null("out"));
        }
        let state = rec.states.get(index).ok_or_else(|| {
            (KcStatus::InvalidArgument, format!("snapshot {index} out of range ({} stored)", rec.states.len()))
        })?;
        let FlowState::Curvature(k) = state else {
            return Err((KcStatus::InvalidArgument, "snapshot is not a real curvature".into()));
        };
        *time = rec.times[index];
        store(out, KcField(k.clone()));
        Ok(())
    })
}

/// Largest relative drift of `H_m` (`m` = 1, 2, 3) over the run.
///
/// # Safety
/// `t` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kc_trajectory_drift(t: *const KcTrajectory, m: usize, out: *mut f64) -> KcStatus {
    guard(|| {
        let rec = &borrow(t, "trajectory")?.0;
        if out.is_null() {
            return Err(null("out"));
        }
        let q = rec
            .invariants
            .quantity(&format!("H{m}"))
            .ok_or_else(|| (KcStatus::UnsupportedOrder, format!("H{m} is not tracked")))?;
        *out = q.max_rel_drift;
        Ok(())
    })
}

/// # Safety
/// `t` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn kc_trajectory_free(t: *mut KcTrajectory) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Run the identity check suites described by a JSON config (the same
/// document the `check` command reads) and return the JSON report through
/// `out_json`, to be released with [`kc_string_free`]. `all_pass` receives
/// whether every check passed. Relative file references resolve against
/// `base_dir`, or the working directory when it is null.
///
/// # Safety
/// `config_json` and `base_dir` (if non-null) must be NUL-terminated UTF-8;
/// out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn kc_run_checks(
    config_json: *const c_char,
    base_dir: *const c_char,
    out_json: *mut *mut c_char,
    all_pass: *mut bool,
) -> KcStatus {
    guard(|| {
        if config_json.is_null() {
            return Err(null("config_json"));
        }
        if out_json.is_null() || all_pass.is_null() {
            return Err(null("out"));
        }
        let utf8 = |p: *const c_char| {
            CStr::from_ptr(p).to_str().map_err(|e| (KcStatus::InvalidArgument, format!("invalid UTF-8: {e}")))
        };
        let text = utf8(config_json)?;
        let base = if base_dir.is_null() { "." } else { utf8(base_dir)? };
        let cfg: CheckConfig = load(text, "config").map_err(lib)?;
        let report: CheckReport = check_report(&cfg, Path::new(base)).map_err(lib)?;
        let json = CString::new(to_json_string(&report)).map_err(|e| (KcStatus::Io, e.to_string()))?;
        *all_pass = report.all_pass();
        *out_json = json.into_raw();
        Ok(())
    })
}

/// Release a string returned by this library.
///
/// # Safety
/// `s` must be null or a string from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

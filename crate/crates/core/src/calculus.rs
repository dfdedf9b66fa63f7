//! Fourier-collocation calculus for 2π-periodic functions on a uniform grid.
//!
//! Every field is the trigonometric interpolant of its samples. Odd-order
//! derivatives drop the Nyquist mode so that real data stay real; even-order
//! derivatives keep it.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Default tolerance for the zero-mean precondition of [`PeriodicField::ds_inv`].
pub const DEFAULT_MEAN_TOL: f64 = 1e-9;

/// Sample type of a periodic field: `f64` or `Complex64`.
pub trait Scalar:
    Copy
    + Send
    + Sync
    + fmt::Debug
    + PartialEq
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Mul<f64, Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + Sum
{
    const IS_REAL: bool;
    fn from_f64(x: f64) -> Self;
    fn to_c64(self) -> Complex64;
    /// Real fields keep only the real part.
    fn from_c64(z: Complex64) -> Self;
    fn modulus(self) -> f64;
    fn is_finite(self) -> bool;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }
}

impl Scalar for f64 {
    const IS_REAL: bool = true;
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_c64(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
    fn from_c64(z: Complex64) -> Self {
        z.re
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}

impl Scalar for Complex64 {
    const IS_REAL: bool = false;
    fn from_f64(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn to_c64(self) -> Complex64 {
        self
    }
    fn from_c64(z: Complex64) -> Self {
        z
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

struct Plan {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

fn plan_for(n: usize) -> Arc<Plan> {
    static PLANS: OnceLock<Mutex<HashMap<usize, Arc<Plan>>>> = OnceLock::new();
    let mut cache = PLANS
        .get_or_init(|| Mutex::new(HashMap::new()))
        .lock()
        .unwrap_or_else(|e| e.into_inner());
    cache
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Arc::new(Plan {
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
            })
        })
        .clone()
}

/// Uniform grid `s_j = 2πj/n` on the parameter circle `S¹ = ℝ/2πℤ`.
#[derive(Clone)]
pub struct PeriodicGrid {
    n: usize,
    plan: Arc<Plan>,
}

impl PartialEq for PeriodicGrid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
    }
}

impl Eq for PeriodicGrid {}

impl fmt::Debug for PeriodicGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PeriodicGrid").field("n", &self.n).finish()
    }
}

impl PeriodicGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 8 || !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid { n });
        }
        Ok(PeriodicGrid { n, plan: plan_for(n) })
    }

    pub fn n_points(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.n as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.node(j)).collect()
    }

    /// Signed wavenumber of FFT bin `j`; the Nyquist bin maps to `+n/2`.
    pub fn wavenumber(&self, j: usize) -> i64 {
        let n = self.n as i64;
        let j = j as i64;
        if j <= n / 2 {
            j
        } else {
            j - n
        }
    }

    pub fn nyquist_bin(&self) -> usize {
        self.n / 2
    }

    /// Normalized Fourier coefficients `c_k` with `f(s_j) = Σ c_k e^{iks_j}`.
    pub fn forward<T: Scalar>(&self, samples: &[T]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = samples.iter().map(|v| v.to_c64()).collect();
        self.plan.forward.process(&mut buf);
        let scale = 1.0 / self.n as f64;
        for c in &mut buf {
            *c *= scale;
        }
        buf
    }

    pub fn inverse<T: Scalar>(&self, mut coeffs: Vec<Complex64>) -> Vec<T> {
        self.plan.inverse.process(&mut coeffs);
        coeffs.into_iter().map(T::from_c64).collect()
    }

    fn check_same(&self, other: &PeriodicGrid) -> Result<()> {
        if self.n != other.n {
            return Err(Error::GridMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }
}

/// Sampled 2π-periodic function.
#[derive(Clone, PartialEq)]
pub struct PeriodicField<T: Scalar> {
    grid: PeriodicGrid,
    samples: Vec<T>,
}

pub type RealField = PeriodicField<f64>;
pub type ComplexField = PeriodicField<Complex64>;

impl<T: Scalar> fmt::Debug for PeriodicField<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PeriodicField")
            .field("n", &self.grid.n)
            .field("samples", &self.samples)
            .finish()
    }
}

impl<T: Scalar> PeriodicField<T> {
    pub fn new(grid: &PeriodicGrid, samples: Vec<T>) -> Result<Self> {
        if samples.len() != grid.n {
            return Err(Error::LengthMismatch {
                expected: grid.n,
                got: samples.len(),
            });
        }
        if let Some(index) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(PeriodicField {
            grid: grid.clone(),
            samples,
        })
    }

    /// Internal constructor for samples already known to be valid.
    pub(crate) fn from_vec(grid: &PeriodicGrid, samples: Vec<T>) -> Self {
        debug_assert_eq!(samples.len(), grid.n);
        PeriodicField {
            grid: grid.clone(),
            samples,
        }
    }

    pub fn from_fn(grid: &PeriodicGrid, f: impl Fn(f64) -> T) -> Self {
        let samples = (0..grid.n).map(|j| f(grid.node(j))).collect();
        Self::from_vec(grid, samples)
    }

    pub fn constant(grid: &PeriodicGrid, value: T) -> Self {
        Self::from_vec(grid, vec![value; grid.n])
    }

    pub fn zeros(grid: &PeriodicGrid) -> Self {
        Self::constant(grid, T::zero())
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn n_points(&self) -> usize {
        self.grid.n
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<T> {
        self.samples
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.modulus()))
    }

    pub fn mean(&self) -> T {
        self.samples.iter().copied().sum::<T>() * (1.0 / self.grid.n as f64)
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self::from_vec(&self.grid, self.samples.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        assert_eq!(self.grid.n, other.grid.n, "grid mismatch");
        Self::from_vec(
            &self.grid,
            self.samples
                .iter()
                .zip(&other.samples)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    pub fn scale(&self, factor: T) -> Self {
        self.map(|v| v * factor)
    }

    pub fn add_constant(&self, c: T) -> Self {
        self.map(|v| v + c)
    }

    /// `max_j |self − other|`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.grid.n, other.grid.n, "grid mismatch");
        self.samples
            .iter()
            .zip(&other.samples)
            .fold(0.0, |m, (&a, &b)| m.max((a - b).modulus()))
    }

    pub fn ensure_same_grid(&self, other: &Self) -> Result<()> {
        self.grid.check_same(&other.grid)
    }

    pub fn coefficients(&self) -> Vec<Complex64> {
        self.grid.forward(&self.samples)
    }

    pub fn from_coefficients(grid: &PeriodicGrid, coeffs: Vec<Complex64>) -> Self {
        Self::from_vec(grid, grid.inverse(coeffs))
    }

    /// Multiply the spectrum by `symbol(k)` for every non-Nyquist wavenumber;
    /// the Nyquist coefficient is multiplied by `nyquist`.
    pub fn apply_symbol(&self, symbol: impl Fn(f64) -> Complex64, nyquist: Complex64) -> Self {
        let mut c = self.coefficients();
        let nyq = self.grid.nyquist_bin();
        for (j, cj) in c.iter_mut().enumerate() {
            if j == nyq {
                *cj *= nyquist;
            } else {
                *cj *= symbol(self.grid.wavenumber(j) as f64);
            }
        }
        Self::from_coefficients(&self.grid, c)
    }

    /// Spectral derivative `D_s f`.
    pub fn ds(&self) -> Self {
        self.ds_n(1)
    }

    /// Spectral derivative of arbitrary order.
    pub fn ds_n(&self, order: u32) -> Self {
        if order == 0 {
            return self.clone();
        }
        let nyquist = if order % 2 == 1 {
            Complex64::new(0.0, 0.0)
        } else {
            let k = self.grid.n as f64 / 2.0;
            Complex64::new(0.0, k).powu(order)
        };
        self.apply_symbol(|k| Complex64::new(0.0, k).powu(order), nyquist)
    }

    /// Mean-zero periodic antiderivative `D_s^{-1} f`.
    ///
    /// Fails with [`Error::NonZeroMean`] when `|mean f| > mean_tol (1 + max|f|)`.
    pub fn ds_inv(&self, mean_tol: f64) -> Result<Self> {
        let mut c = self.coefficients();
        let mean = c[0];
        if mean.norm() > mean_tol * (1.0 + self.max_abs()) {
            return Err(Error::NonZeroMean { mean, step: None });
        }
        let nyq = self.grid.nyquist_bin();
        for (j, cj) in c.iter_mut().enumerate() {
            if j == 0 || j == nyq {
                *cj = Complex64::new(0.0, 0.0);
            } else {
                *cj /= Complex64::new(0.0, self.grid.wavenumber(j) as f64);
            }
        }
        Ok(Self::from_coefficients(&self.grid, c))
    }

    /// `D_s^{-1}` of `f − mean(f)`, without the mean check.
    pub fn ds_inv_centered(&self) -> Self {
        let m = self.mean();
        self.add_constant(-m)
            .ds_inv(f64::INFINITY)
            .expect("mean tolerance is infinite")
    }

    /// Trapezoidal quadrature `∫_{S¹} f ds`, spectrally exact.
    pub fn integrate(&self) -> T {
        self.samples.iter().copied().sum::<T>() * self.grid.spacing()
    }

    /// Trigonometric interpolant evaluated at `s + sigma`.
    pub fn shift(&self, sigma: f64) -> Self {
        let half = self.grid.n as f64 / 2.0;
        self.apply_symbol(
            |k| Complex64::from_polar(1.0, k * sigma),
            Complex64::new((half * sigma).cos(), 0.0),
        )
    }

    /// Trigonometric interpolant at an arbitrary parameter value.
    pub fn eval_at(&self, s: f64) -> T {
        let c = self.coefficients();
        T::from_c64(eval_coefficients(&self.grid, &c, s))
    }

    /// Re-sample the trigonometric interpolant on a grid with `n` points.
    pub fn resample(&self, n: usize) -> Result<Self> {
        let target = PeriodicGrid::new(n)?;
        let c = self.coefficients();
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        let (n_old, n_new) = (self.grid.n as i64, n as i64);
        for (j, &cj) in c.iter().enumerate() {
            let k = self.grid.wavenumber(j);
            if k == n_old / 2 {
                // split cos(n s / 2) into ±n/2 halves
                for kk in [k, -k] {
                    place_mode(&mut out, n_new, kk, cj * 0.5);
                }
            } else {
                place_mode(&mut out, n_new, k, cj);
            }
        }
        Ok(Self::from_coefficients(&target, out))
    }

    /// 2/3-rule truncation: zero every mode with `|k| > n/3`.
    pub fn dealias(&self) -> Self {
        self.truncate(self.grid.n as f64 / 3.0)
    }

    /// Zero every mode with `|k| > max_k` (the Nyquist mode included).
    pub fn truncate(&self, max_k: f64) -> Self {
        self.apply_symbol(
            |k| {
                if k.abs() > max_k {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(1.0, 0.0)
                }
            },
            Complex64::new(0.0, 0.0),
        )
    }
}

fn place_mode(out: &mut [Complex64], n_new: i64, k: i64, value: Complex64) {
    if k.abs() > n_new / 2 {
        return;
    }
    // ±n/2 both fold onto the single Nyquist bin of the target grid
    out[k.rem_euclid(n_new) as usize] += value;
}

/// Evaluate `Σ c_k e^{iks}` with the symmetric Nyquist convention.
pub fn eval_coefficients(grid: &PeriodicGrid, c: &[Complex64], s: f64) -> Complex64 {
    let nyq = grid.nyquist_bin();
    let mut acc = Complex64::new(0.0, 0.0);
    for (j, &cj) in c.iter().enumerate() {
        if j == nyq {
            acc += cj * (grid.n as f64 / 2.0 * s).cos();
        } else {
            acc += cj * Complex64::from_polar(1.0, grid.wavenumber(j) as f64 * s);
        }
    }
    acc
}

impl RealField {
    pub fn to_complex(&self) -> ComplexField {
        ComplexField::from_vec(
            &self.grid,
            self.samples.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        )
    }
}

impl ComplexField {
    pub fn from_parts(re: &RealField, im: &RealField) -> Result<Self> {
        re.ensure_same_grid(im)?;
        Ok(ComplexField::from_vec(
            &re.grid,
            re.samples
                .iter()
                .zip(&im.samples)
                .map(|(&a, &b)| Complex64::new(a, b))
                .collect(),
        ))
    }

    pub fn re(&self) -> RealField {
        RealField::from_vec(&self.grid, self.samples.iter().map(|z| z.re).collect())
    }

    pub fn im(&self) -> RealField {
        RealField::from_vec(&self.grid, self.samples.iter().map(|z| z.im).collect())
    }
}

macro_rules! pointwise_op {
    ($tr:ident, $method:ident, $op:tt) => {
        impl<T: Scalar> $tr<&PeriodicField<T>> for &PeriodicField<T> {
            type Output = PeriodicField<T>;
            fn $method(self, rhs: &PeriodicField<T>) -> PeriodicField<T> {
                self.zip_map(rhs, |a, b| a $op b)
            }
        }
        impl<T: Scalar> $tr<PeriodicField<T>> for PeriodicField<T> {
            type Output = PeriodicField<T>;
            fn $method(self, rhs: PeriodicField<T>) -> PeriodicField<T> {
                self.zip_map(&rhs, |a, b| a $op b)
            }
        }
        impl<T: Scalar> $tr<&PeriodicField<T>> for PeriodicField<T> {
            type Output = PeriodicField<T>;
            fn $method(self, rhs: &PeriodicField<T>) -> PeriodicField<T> {
                self.zip_map(rhs, |a, b| a $op b)
            }
        }
        impl<T: Scalar> $tr<PeriodicField<T>> for &PeriodicField<T> {
            type Output = PeriodicField<T>;
            fn $method(self, rhs: PeriodicField<T>) -> PeriodicField<T> {
                self.zip_map(&rhs, |a, b| a $op b)
            }
        }
    };
}

pointwise_op!(Add, add, +);
pointwise_op!(Sub, sub, -);
pointwise_op!(Mul, mul, *);

impl<T: Scalar> Mul<f64> for &PeriodicField<T> {
    type Output = PeriodicField<T>;
    fn mul(self, rhs: f64) -> PeriodicField<T> {
        self.map(|v| v * rhs)
    }
}

impl<T: Scalar> Mul<f64> for PeriodicField<T> {
    type Output = PeriodicField<T>;
    fn mul(self, rhs: f64) -> PeriodicField<T> {
        self.map(|v| v * rhs)
    }
}

impl<T: Scalar> Neg for &PeriodicField<T> {
    type Output = PeriodicField<T>;
    fn neg(self) -> PeriodicField<T> {
        self.map(|v| -v)
    }
}

impl<T: Scalar> Neg for PeriodicField<T> {
    type Output = PeriodicField<T>;
    fn neg(self) -> PeriodicField<T> {
        self.map(|v| -v)
    }
}

/// `D_s f`.
pub fn ds<T: Scalar>(f: &PeriodicField<T>) -> PeriodicField<T> {
    f.ds()
}

/// Mean-zero `D_s^{-1} f`.
pub fn ds_inv<T: Scalar>(f: &PeriodicField<T>, mean_tol: f64) -> Result<PeriodicField<T>> {
    f.ds_inv(mean_tol)
}

/// `∫_{S¹} f ds`.
pub fn integrate<T: Scalar>(f: &PeriodicField<T>) -> T {
    f.integrate()
}

/// `f(· + sigma)`.
pub fn shift<T: Scalar>(f: &PeriodicField<T>, sigma: f64) -> PeriodicField<T> {
    f.shift(sigma)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> PeriodicGrid {
        PeriodicGrid::new(n).unwrap()
    }

    #[test]
    fn grid_rejects_odd_and_small() {
        assert!(matches!(PeriodicGrid::new(7), Err(Error::InvalidGrid { n: 7 })));
        assert!(PeriodicGrid::new(6).is_err());
        assert!(PeriodicGrid::new(8).is_ok());
        let g = grid(16);
        assert_eq!(g.nodes()[4], PI / 2.0);
        assert_eq!(g.wavenumber(8), 8);
        assert_eq!(g.wavenumber(9), -7);
    }

    #[test]
    fn field_rejects_bad_samples() {
        let g = grid(8);
        assert!(matches!(
            RealField::new(&g, vec![0.0; 7]),
            Err(Error::LengthMismatch { expected: 8, got: 7 })
        ));
        let mut v = vec![0.0; 8];
        v[3] = f64::NAN;
        assert!(matches!(RealField::new(&g, v), Err(Error::NonFinite { index: 3 })));
    }

    #[test]
    fn derivative_of_sine() {
        let g = grid(32);
        let f = RealField::from_fn(&g, f64::sin);
        let exact = RealField::from_fn(&g, f64::cos);
        assert!(f.ds().max_abs_diff(&exact) <= 1e-13);
        assert_eq!(RealField::constant(&g, 1.0).ds().max_abs(), 0.0);
    }

    #[test]
    fn derivative_grid_refinement() {
        let f64_ = RealField::from_fn(&grid(64), |s| s.cos().exp());
        let f128 = RealField::from_fn(&grid(128), |s| s.cos().exp());
        let d64 = f64_.ds().resample(128).unwrap();
        assert!(d64.max_abs_diff(&f128.ds()) <= 1e-10);
    }

    #[test]
    fn antiderivatives() {
        let g = grid(32);
        let f = RealField::from_fn(&g, f64::cos);
        let sin = RealField::from_fn(&g, f64::sin);
        assert!(f.ds_inv(DEFAULT_MEAN_TOL).unwrap().max_abs_diff(&sin) <= 1e-13);

        let f2 = RealField::from_fn(&g, |s| (2.0 * s).sin());
        let want = RealField::from_fn(&g, |s| -0.5 * (2.0 * s).cos());
        assert!(f2.ds_inv(DEFAULT_MEAN_TOL).unwrap().max_abs_diff(&want) <= 1e-13);

        match RealField::constant(&g, 1.0).ds_inv(DEFAULT_MEAN_TOL) {
            Err(Error::NonZeroMean { mean, .. }) => assert!((mean.re - 1.0).abs() < 1e-15),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn quadrature() {
        let g = grid(32);
        assert!((RealField::constant(&g, 1.0).integrate() - 2.0 * PI).abs() < 1e-14);
        assert!((RealField::from_fn(&g, |s| s.sin().powi(2)).integrate() - PI).abs() < 1e-14);
        assert!(RealField::from_fn(&g, f64::cos).integrate().abs() <= 1e-14);
    }

    #[test]
    fn shifts() {
        let g = grid(32);
        let sin = RealField::from_fn(&g, f64::sin);
        assert!(sin.shift(PI / 2.0).max_abs_diff(&RealField::from_fn(&g, f64::cos)) <= 1e-13);
        let f = RealField::from_fn(&g, |s| (s.sin()).exp());
        assert!(f.shift(2.0 * PI).max_abs_diff(&f) <= 1e-13);
        let cos = RealField::from_fn(&g, f64::cos);
        let want = RealField::from_fn(&g, |s| (s + PI / 3.0).cos());
        assert!(cos.shift(PI / 3.0).max_abs_diff(&want) <= 1e-13);
    }

    #[test]
    fn resample_round_trip_and_eval() {
        let g = grid(16);
        let f = RealField::from_fn(&g, |s| 1.0 + (3.0 * s).cos() - 0.5 * (7.0 * s).sin());
        let up = f.resample(64).unwrap();
        let back = up.resample(16).unwrap();
        assert!(back.max_abs_diff(&f) <= 1e-13);
        let s: f64 = 0.37;
        let exact = 1.0 + (3.0 * s).cos() - 0.5 * (7.0 * s).sin();
        assert!((f.eval_at(s) - exact).abs() <= 1e-13);
        assert!((up.eval_at(s) - exact).abs() <= 1e-13);
    }

    #[test]
    fn complex_fields_differentiate() {
        let g = grid(16);
        let f = ComplexField::from_fn(&g, |s| Complex64::from_polar(1.0, -2.0 * s));
        let want = f.scale(Complex64::new(0.0, -2.0));
        assert!(f.ds().max_abs_diff(&want) <= 1e-13);
        assert!(f.integrate().norm() <= 1e-14);
    }

    #[test]
    fn dealias_keeps_low_modes() {
        let g = grid(24);
        let low = RealField::from_fn(&g, |s| (3.0 * s).cos());
        let high = RealField::from_fn(&g, |s| (10.0 * s).cos());
        assert!(low.dealias().max_abs_diff(&low) <= 1e-14);
        assert!(high.dealias().max_abs() <= 1e-14);
    }
}

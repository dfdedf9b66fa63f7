//! Fixed-step time integrators shared by every model and representation.

use num_complex::Complex64;

use crate::calculus::{PeriodicField, Scalar};
use crate::error::{Error, Result};
use crate::flow::spec::BLOWUP_THRESHOLD;
use crate::plane::PlaneField;

/// Absolute stability limit of classical RK4 on the imaginary axis.
pub const RK4_IMAGINARY_LIMIT: f64 = 2.828_427_124_746_19;
const POWER_ITERATIONS: usize = 60;

/// State vectors the integrators can advance.
pub trait FlowVector: Clone {
    /// `self + a·x`.
    fn axpy(&self, a: f64, x: &Self) -> Self;
    fn max_abs(&self) -> f64;
    /// Root-mean-square over samples.
    fn rms(&self) -> f64;
    /// Multiply the Fourier coefficients by `symbol[bin]`.
    fn multiply_symbol(&self, symbol: &[Complex64]) -> Self;
    /// Zero every Fourier mode with `|k| > max_k`.
    fn truncate(&self, max_k: f64) -> Self;
    /// A fixed broadband vector of the same shape, for power iteration.
    fn probe(&self) -> Self;
}

impl<T: Scalar> FlowVector for PeriodicField<T> {
    fn axpy(&self, a: f64, x: &Self) -> Self {
        self.zip_map(x, |u, v| u + v * a)
    }

    fn max_abs(&self) -> f64 {
        PeriodicField::max_abs(self)
    }

    fn rms(&self) -> f64 {
        let sum: f64 = self.samples().iter().map(|v| v.modulus().powi(2)).sum();
        (sum / self.n_points() as f64).sqrt()
    }

    fn multiply_symbol(&self, symbol: &[Complex64]) -> Self {
        let mut c = self.coefficients();
        for (cj, s) in c.iter_mut().zip(symbol) {
            *cj *= s;
        }
        PeriodicField::from_coefficients(self.grid(), c)
    }

    fn truncate(&self, max_k: f64) -> Self {
        PeriodicField::truncate(self, max_k)
    }

    fn probe(&self) -> Self {
        // golden-ratio phases excite every mode with comparable weight
        let phi = 0.618_033_988_749_895_f64;
        let samples = (0..self.n_points())
            .map(|j| {
                let x = ((j as f64 + 1.0) * phi).fract() - 0.5;
                let y = ((j as f64 + 1.0) * phi * phi).fract() - 0.5;
                T::from_c64(Complex64::new(x, y))
            })
            .collect();
        PeriodicField::from_vec(self.grid(), samples)
    }
}

impl FlowVector for PlaneField {
    fn axpy(&self, a: f64, x: &Self) -> Self {
        PlaneField {
            x: self.x.axpy(a, &x.x),
            y: self.y.axpy(a, &x.y),
        }
    }

    fn max_abs(&self) -> f64 {
        PlaneField::max_abs(self)
    }

    fn rms(&self) -> f64 {
        (0.5 * (self.x.rms().powi(2) + self.y.rms().powi(2))).sqrt()
    }

    fn multiply_symbol(&self, symbol: &[Complex64]) -> Self {
        PlaneField {
            x: self.x.multiply_symbol(symbol),
            y: self.y.multiply_symbol(symbol),
        }
    }

    fn truncate(&self, max_k: f64) -> Self {
        PlaneField {
            x: self.x.truncate(max_k),
            y: self.y.truncate(max_k),
        }
    }

    fn probe(&self) -> Self {
        PlaneField {
            x: self.x.probe(),
            y: self.y.probe().shift(1.0),
        }
    }
}

pub type Rhs<'a, V> = dyn Fn(&V) -> Result<V> + 'a;

/// One classical RK4 step.
pub fn rk4_step<V: FlowVector>(u: &V, dt: f64, f: &Rhs<V>) -> Result<V> {
    let k1 = f(u)?;
    let k2 = f(&u.axpy(0.5 * dt, &k1))?;
    let k3 = f(&u.axpy(0.5 * dt, &k2))?;
    let k4 = f(&u.axpy(dt, &k3))?;
    Ok(u
        .axpy(dt / 6.0, &k1)
        .axpy(dt / 3.0, &k2)
        .axpy(dt / 3.0, &k3)
        .axpy(dt / 6.0, &k4))
}

/// Exponentials `e^{ℓ dt}` and `e^{ℓ dt/2}` of a diagonal linear part.
pub struct Propagators {
    full: Vec<Complex64>,
    half: Vec<Complex64>,
}

impl Propagators {
    pub fn new(symbol: &[Complex64], dt: f64) -> Self {
        Propagators {
            full: symbol.iter().map(|l| (l * dt).exp()).collect(),
            half: symbol.iter().map(|l| (l * (0.5 * dt)).exp()).collect(),
        }
    }
}

/// One Lawson integrating-factor RK4 step for `u_t = Lu + N(u)`, where `n`
/// evaluates `N`.
pub fn if_rk4_step<V: FlowVector>(u: &V, dt: f64, p: &Propagators, n: &Rhs<V>) -> Result<V> {
    let (e, e2) = (&p.full, &p.half);
    let k1 = n(u)?;
    let k2 = n(&u.axpy(0.5 * dt, &k1).multiply_symbol(e2))?;
    let u_half = u.multiply_symbol(e2);
    let k3 = n(&u_half.axpy(0.5 * dt, &k2))?;
    let k4 = n(&u.multiply_symbol(e).axpy(dt, &k3.multiply_symbol(e2)))?;
    let mid = k2.axpy(1.0, &k3).multiply_symbol(e2);
    Ok(u
        .multiply_symbol(e)
        .axpy(dt / 6.0, &k1.multiply_symbol(e))
        .axpy(dt / 3.0, &mid)
        .axpy(dt / 6.0, &k4))
}

/// Linearization of `f` about the constant state `c`, as a Fourier symbol:
/// `f(c + εe^{iks}) ≈ f(c) + εℓ(k)e^{iks}`. Real fields are probed with
/// `cos(ks)` and the symbol is extended by conjugate symmetry. The `k = 0`
/// and Nyquist entries are zero.
pub fn linear_symbol<T: Scalar>(
    constant: &PeriodicField<T>,
    f: &Rhs<PeriodicField<T>>,
) -> Result<Vec<Complex64>> {
    let grid = constant.grid();
    let n = grid.n_points();
    let eps = 1e-6 * (1.0 + constant.max_abs());
    let mut symbol = vec![Complex64::new(0.0, 0.0); n];
    for bin in 1..n {
        let k = grid.wavenumber(bin);
        if bin == grid.nyquist_bin() || (T::IS_REAL && k < 0) {
            continue;
        }
        let kf = k as f64;
        let mode = PeriodicField::<T>::from_fn(grid, |s| {
            if T::IS_REAL {
                T::from_f64((kf * s).cos())
            } else {
                T::from_c64(Complex64::from_polar(1.0, kf * s))
            }
        });
        let plus = f(&constant.axpy(eps, &mode))?;
        let minus = f(&constant.axpy(-eps, &mode))?;
        let c = plus.axpy(-1.0, &minus).coefficients()[bin] / (2.0 * eps);
        if T::IS_REAL {
            symbol[bin] = c * 2.0;
            symbol[n - bin] = (c * 2.0).conj();
        } else {
            symbol[bin] = c;
        }
    }
    Ok(symbol)
}

/// Spectral radius of the Jacobian of `f` at `u`, by power iteration on
/// symmetric finite differences.
pub fn spectral_radius<V: FlowVector>(u: &V, f: &Rhs<V>) -> Result<f64> {
    let eps = 1e-6 * (1.0 + u.max_abs());
    let mut v = u.probe();
    let scale = v.rms();
    if scale == 0.0 {
        return Ok(0.0);
    }
    v = v.axpy(1.0 / scale - 1.0, &v);
    let mut rho: f64 = 0.0;
    for it in 0..POWER_ITERATIONS {
        let plus = f(&u.axpy(eps, &v))?;
        let minus = f(&u.axpy(-eps, &v))?;
        let jv = plus.axpy(-1.0, &minus);
        let norm = jv.rms() / (2.0 * eps);
        if it >= POWER_ITERATIONS / 2 {
            rho = rho.max(norm);
        }
        if norm == 0.0 {
            return Ok(0.0);
        }
        v = jv.axpy(1.0 / (2.0 * eps * norm) - 1.0, &jv);
    }
    Ok(rho)
}

/// Largest stable RK4 step for spectral radius `rho`.
pub fn max_stable_dt(rho: f64, safety: f64) -> f64 {
    if rho <= 0.0 {
        f64::INFINITY
    } else {
        safety * RK4_IMAGINARY_LIMIT / rho
    }
}

pub(crate) fn check_blowup<V: FlowVector>(u: &V, time: f64) -> Result<()> {
    let magnitude = u.max_abs();
    if !(magnitude <= BLOWUP_THRESHOLD) {
        return Err(Error::Blowup { time, magnitude });
    }
    Ok(())
}

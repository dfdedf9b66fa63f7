//! Initial-data descriptors and the seeded random field generator.
//!
//! Random fields come from `ChaCha8Rng::seed_from_u64(seed)`: for each
//! `k = 1..=max_mode` two uniform draws `a_k, b_k ∈ [−1, 1]` are taken in that
//! order and the field is `mean + amplitude · Σ (a_k cos ks + b_k sin ks)/k²`.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::calculus::{ComplexField, PeriodicGrid, RealField};
use crate::eca::curve::EcaCurve;
use crate::eca::hill::{eca_from_curvature, DEFAULT_CLOSURE_TOL, DEFAULT_SUBSTEPS};
use crate::error::{Error, Result};
use crate::euclid::curve::{euc_from_curvature, EucCurve, DEFAULT_EUC_CLOSURE_TOL};
use crate::io::{read_json, CurveData, FieldData};

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random real field with modes `1..=max_mode` (see the module docs).
pub fn random_band_limited(
    grid: &PeriodicGrid,
    rng: &mut impl Rng,
    max_mode: usize,
    mean: f64,
    amplitude: f64,
) -> RealField {
    let coeffs: Vec<(f64, f64)> = (0..max_mode)
        .map(|_| (rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)))
        .collect();
    RealField::from_fn(grid, |s| {
        let wave: f64 = coeffs
            .iter()
            .enumerate()
            .map(|(j, (a, b))| {
                let k = (j + 1) as f64;
                (a * (k * s).cos() + b * (k * s).sin()) / (k * k)
            })
            .sum();
        mean + amplitude * wave
    })
}

/// Complex field whose real and imaginary parts are drawn one after the
/// other by [`random_band_limited`].
pub fn random_complex_band_limited(
    grid: &PeriodicGrid,
    rng: &mut impl Rng,
    max_mode: usize,
    mean: Complex64,
    amplitude: f64,
) -> ComplexField {
    let re = random_band_limited(grid, rng, max_mode, mean.re, amplitude);
    let im = random_band_limited(grid, rng, max_mode, mean.im, amplitude);
    ComplexField::from_parts(&re, &im).expect("same grid")
}

fn resolve(base_dir: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base_dir.join(path)
    }
}

fn check_grid(grid: &PeriodicGrid, got: usize) -> Result<()> {
    if grid.n_points() != got {
        return Err(Error::LengthMismatch {
            expected: grid.n_points(),
            got,
        });
    }
    Ok(())
}

/// Scalar initial data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSeed {
    Constant(f64),
    /// `base + amplitude · cos(mode·s + phase)`.
    CosinePerturbation {
        base: f64,
        amplitude: f64,
        mode: u32,
        #[serde(default)]
        phase: f64,
    },
    /// Inline samples on the run grid.
    Samples(Vec<f64>),
    /// A field JSON file, relative to the config file.
    File(PathBuf),
    Random {
        seed: u64,
        max_mode: usize,
        #[serde(default)]
        mean: f64,
        amplitude: f64,
    },
}

impl FieldSeed {
    pub fn realize(&self, grid: &PeriodicGrid, base_dir: &Path) -> Result<RealField> {
        match self {
            FieldSeed::Constant(c) => RealField::new(grid, vec![*c; grid.n_points()]),
            FieldSeed::CosinePerturbation {
                base,
                amplitude,
                mode,
                phase,
            } => {
                let m = f64::from(*mode);
                RealField::new(grid, grid.nodes().iter().map(|s| base + amplitude * (m * s + phase).cos()).collect())
            }
            FieldSeed::Samples(v) => {
                check_grid(grid, v.len())?;
                RealField::new(grid, v.clone())
            }
            FieldSeed::File(path) => {
                let f = read_json::<FieldData>(&resolve(base_dir, path))?.into_field()?;
                check_grid(grid, f.n_points())?;
                Ok(f)
            }
            FieldSeed::Random {
                seed,
                max_mode,
                mean,
                amplitude,
            } => {
                if *max_mode >= grid.n_points() / 2 {
                    return Err(Error::Config(format!(
                        "random seed max_mode {max_mode} must stay below the Nyquist mode {}",
                        grid.n_points() / 2
                    )));
                }
                let mut rng = rng_from_seed(*seed);
                Ok(random_band_limited(grid, &mut rng, *max_mode, *mean, *amplitude))
            }
        }
    }
}

/// Curve initial data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum CurveSeed {
    UnitCircle,
    /// Star-shaped `r(θ) = base + amplitude · cos(mode·θ)`, reparametrized
    /// to `det(γ, γ_s) = 1` (equicentroaffine only).
    Polar { base: f64, amplitude: f64, mode: u32 },
    /// Reconstruct from a curvature seed; fails unless it closes up.
    FromCurvature(FieldSeed),
    Samples { x: Vec<f64>, y: Vec<f64> },
    /// A curve JSON file, relative to the config file.
    File(PathBuf),
}

impl CurveSeed {
    fn data(&self, grid: &PeriodicGrid, base_dir: &Path) -> Result<Option<CurveData>> {
        let data = match self {
            CurveSeed::Samples { x, y } => CurveData {
                n: grid.n_points(),
                x: x.clone(),
                y: y.clone(),
            },
            CurveSeed::File(path) => read_json::<CurveData>(&resolve(base_dir, path))?,
            _ => return Ok(None),
        };
        check_grid(grid, data.n)?;
        Ok(Some(data))
    }

    pub fn realize_eca(&self, grid: &PeriodicGrid, base_dir: &Path) -> Result<EcaCurve> {
        if let Some(data) = self.data(grid, base_dir)? {
            return data.into_eca();
        }
        match self {
            CurveSeed::UnitCircle => Ok(EcaCurve::unit_circle(grid)),
            CurveSeed::Polar { base, amplitude, mode } => {
                if !(base.abs() > amplitude.abs()) {
                    return Err(Error::Config("polar seed needs |base| > |amplitude|".into()));
                }
                let m = f64::from(*mode);
                EcaCurve::from_polar(grid, |t| base + amplitude * (m * t).cos())
            }
            CurveSeed::FromCurvature(k) => {
                eca_from_curvature(&k.realize(grid, base_dir)?, DEFAULT_CLOSURE_TOL, DEFAULT_SUBSTEPS)
            }
            CurveSeed::Samples { .. } | CurveSeed::File(_) => unreachable!("handled above"),
        }
    }

    pub fn realize_euc(&self, grid: &PeriodicGrid, base_dir: &Path) -> Result<EucCurve> {
        if let Some(data) = self.data(grid, base_dir)? {
            return data.into_euc();
        }
        match self {
            CurveSeed::UnitCircle => Ok(EucCurve::unit_circle(grid, false)),
            CurveSeed::Polar { .. } => Err(Error::Config("polar seeds are equicentroaffine only".into())),
            CurveSeed::FromCurvature(k) => euc_from_curvature(&k.realize(grid, base_dir)?, DEFAULT_EUC_CLOSURE_TOL),
            CurveSeed::Samples { .. } | CurveSeed::File(_) => unreachable!("handled above"),
        }
    }
}

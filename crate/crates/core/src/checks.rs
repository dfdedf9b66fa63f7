//! Named identity checks with residuals and tolerances, as run by the
//! `check` and `miura` commands.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::calculus::{PeriodicGrid, RealField, DEFAULT_MEAN_TOL};
use crate::eca::curve::{EcaCurve, EcaTangent, DEFAULT_DET_TOL};
use crate::eca::forms::{lemma31_residual, omega0, omega_k, phi_form};
use crate::eca::group::{sl2_apply, sl2_tangent};
use crate::eca::hierarchy::{differential_h, gradient_g};
use crate::eca::level::{level_integrals, project_level_tangent, LevelSetSpec};
use crate::error::{Error, Result};
use crate::euclid::curve::{e2_apply, rotation, EucCurve, EucTangent, DEFAULT_SPEED_TOL};
use crate::euclid::forms::omega_hat_k;
use crate::euclid::hierarchy::{differential_h_hat, mkdv_pairs};
use crate::flow::{flow_conjugacy_residual, Scheme};
use crate::miura::{
    admissible_intertwine_input, intertwine_sides, miura_curvature, pullback_hamiltonian_residual, pullback_omega,
};
use crate::plane::Mat2;
use crate::residual::Comparison;
use crate::seeds::{random_band_limited, random_complex_band_limited};

pub const CALCULUS_TOL: f64 = 1e-11;
pub const PAIRING_TOL: f64 = 1e-9;
pub const SKEW_TOL: f64 = 1e-10;
pub const LEMMA_TOL: f64 = 1e-10;
pub const LEVEL_TOL: f64 = 1e-9;
pub const INVARIANCE_TOL: f64 = 1e-10;
pub const CONJUGACY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckEntry {
    /// Worst residual over all trials; absent if the check could not run.
    pub residual: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub checks: BTreeMap<String, CheckEntry>,
}

impl CheckReport {
    /// Record the worst of `residuals`, or the first error.
    pub fn record(&mut self, name: &str, tolerance: f64, residuals: Result<Vec<f64>>) {
        let entry = match residuals {
            Ok(values) => {
                let worst = values.into_iter().fold(0.0, |a: f64, b| if b.is_nan() { f64::NAN } else { a.max(b) });
                CheckEntry {
                    residual: worst.is_finite().then_some(worst),
                    tolerance,
                    pass: worst <= tolerance,
                    error: (!worst.is_finite()).then(|| "non-finite residual".to_string()),
                }
            }
            Err(e) => CheckEntry {
                residual: None,
                tolerance,
                pass: false,
                error: Some(e.to_string()),
            },
        };
        self.checks.insert(name.to_string(), entry);
    }

    pub fn all_pass(&self) -> bool {
        self.checks.values().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.checks.iter().filter(|(_, c)| !c.pass).map(|(k, _)| k.as_str()).collect()
    }

    pub fn merge(&mut self, other: CheckReport) {
        self.checks.extend(other.checks);
    }
}

/// Relative residual `|lhs − rhs| / (1 + max(|lhs|, |rhs|))`.
fn rel(lhs: f64, rhs: f64) -> f64 {
    let c = Comparison::new(lhs, rhs);
    c.residual / c.scale()
}

fn trials<F>(n: usize, mut f: F) -> Result<Vec<f64>>
where
    F: FnMut(usize) -> Result<f64>,
{
    (0..n).map(&mut f).collect()
}

/// Shared inputs of the suites.
pub struct Fixture<'a, R: Rng> {
    pub grid: PeriodicGrid,
    pub rng: &'a mut R,
    /// Random tangents per identity.
    pub trials: usize,
    /// Highest mode in random fields.
    pub max_mode: usize,
}

impl<R: Rng> Fixture<'_, R> {
    fn field(&mut self, mean: f64, amplitude: f64) -> RealField {
        random_band_limited(&self.grid, self.rng, self.max_mode, mean, amplitude)
    }
}

/// Integration by parts, `D_s ∘ D_s^{-1}` and shift commutation.
pub fn calculus_suite<R: Rng>(fx: &mut Fixture<R>) -> CheckReport {
    let mut report = CheckReport::default();
    let mut ibp = Vec::new();
    let mut inverse = Vec::new();
    let mut shift = Vec::new();
    for _ in 0..fx.trials {
        let f = fx.field(0.3, 1.0);
        let g = fx.field(-0.2, 1.0);
        ibp.push(((&f * &g.ds()).integrate() + (&f.ds() * &g).integrate()).abs());
        let centered = f.add_constant(-f.mean());
        inverse.push(match centered.ds_inv(DEFAULT_MEAN_TOL) {
            Ok(a) => a.ds().max_abs_diff(&centered),
            Err(_) => f64::NAN,
        });
        let sigma = fx.rng.gen_range(-3.0..3.0);
        shift.push(f.shift(sigma).ds().max_abs_diff(&f.ds().shift(sigma)));
    }
    report.record("calculus.integration_by_parts", CALCULUS_TOL, Ok(ibp));
    report.record("calculus.ds_of_ds_inv", CALCULUS_TOL, Ok(inverse));
    report.record("calculus.shift_commutation", CALCULUS_TOL, Ok(shift));
    report
}

fn xn(kappa: &RealField, n: usize) -> Result<EcaTangent> {
    Ok(EcaTangent::new(gradient_g(kappa, n + 1, DEFAULT_MEAN_TOL)?))
}

/// Hamiltonian pairings, skew-symmetry, Lemma 3.1, level-set machinery and
/// moment maps at the curvature `kappa`; curve-level checks when a curve is
/// given (its own curvature is then used for those).
pub fn eca_suite<R: Rng>(fx: &mut Fixture<R>, kappa: &RealField, curve: Option<&EcaCurve>) -> CheckReport {
    let mut report = CheckReport::default();
    let free = LevelSetSpec::unconstrained();
    let tangents: Vec<EcaTangent> = (0..fx.trials).map(|_| EcaTangent::new(fx.field(0.1, 1.0))).collect();
    let others: Vec<EcaTangent> = (0..fx.trials).map(|_| EcaTangent::new(fx.field(-0.1, 1.0))).collect();

    for n in 1..=3 {
        let r = xn(kappa, n).and_then(|x| {
            trials(fx.trials, |j| Ok(rel(omega0(&x, &tangents[j])?, differential_h(kappa, n, &tangents[j])?)))
        });
        report.record(&format!("eca.omega0_pairing_n{n}"), PAIRING_TOL, r);
    }
    for n in 1..=2 {
        let r = xn(kappa, n).and_then(|x| {
            trials(fx.trials, |j| {
                Ok(rel(omega_k(kappa, &x, &tangents[j], 1, &free)?, differential_h(kappa, n + 1, &tangents[j])?))
            })
        });
        report.record(&format!("eca.omega1_pairing_n{n}"), PAIRING_TOL, r);
    }
    for k in 0..=1 {
        let r = trials(fx.trials, |j| {
            let ab = omega_k(kappa, &tangents[j], &others[j], k, &free)?;
            let ba = omega_k(kappa, &others[j], &tangents[j], k, &free)?;
            Ok((ab + ba).abs())
        });
        report.record(&format!("eca.omega{k}_skew"), SKEW_TOL, r);
    }
    // the lemma needs `∫ α κ_s = 0` so that `Ω(α)` has an antiderivative
    let ks = kappa.ds();
    let ks_norm = (&ks * &ks).integrate();
    let admissible = |a: &RealField| {
        if ks_norm > 1e-14 {
            a - &(&ks * ((a * &ks).integrate() / ks_norm))
        } else {
            a.clone()
        }
    };
    let r = trials(fx.trials, |j| {
        lemma31_residual(kappa, &admissible(&tangents[j].alpha), &admissible(&others[j].alpha), DEFAULT_MEAN_TOL)
    });
    report.record("eca.lemma31", LEMMA_TOL, r);

    let rep = EcaTangent::new(RealField::constant(kappa.grid(), 1.0));
    let r = trials(fx.trials, |j| {
        Ok(rel(omega_k(kappa, &rep, &tangents[j], 1, &free)?, differential_h(kappa, 1, &tangents[j])?))
    });
    report.record("eca.moment_map_h1", PAIRING_TOL, r);

    for m in 1..=2 {
        let level = LevelSetSpec::through(kappa, m);
        let r = level.and_then(|level| {
            trials(fx.trials, |j| {
                let t = project_level_tangent(kappa, &tangents[j].alpha, &level)?;
                Ok(level_integrals(kappa, &t, m)?.into_iter().fold(0.0, |a, v| a.max(v.abs())))
            })
        });
        report.record(&format!("eca.level_integrals_m{m}"), LEVEL_TOL, r);
    }

    let on_level1 = LevelSetSpec::through(kappa, 1).and_then(|level| {
        let a = (0..fx.trials)
            .map(|j| project_level_tangent(kappa, &tangents[j].alpha, &level))
            .collect::<Result<Vec<_>>>()?;
        let b = (0..fx.trials)
            .map(|j| project_level_tangent(kappa, &others[j].alpha, &level))
            .collect::<Result<Vec<_>>>()?;
        Ok((level, a, b))
    });
    match on_level1 {
        Ok((level, a, b)) => {
            let r = xn(kappa, 1).and_then(|x| {
                trials(fx.trials, |j| Ok(rel(omega_k(kappa, &x, &a[j], 2, &level)?, differential_h(kappa, 3, &a[j])?)))
            });
            report.record("eca.omega2_pairing_n1", PAIRING_TOL, r);
            let r = trials(fx.trials, |j| {
                Ok((omega_k(kappa, &a[j], &b[j], 2, &level)? + omega_k(kappa, &b[j], &a[j], 2, &level)?).abs())
            });
            report.record("eca.omega2_skew", SKEW_TOL, r);
            let r = trials(fx.trials, |j| {
                Ok(rel(omega_k(kappa, &rep, &a[j], 2, &level)?, differential_h(kappa, 2, &a[j])?))
            });
            report.record("eca.moment_map_h2_level1", PAIRING_TOL, r);
        }
        Err(e) => {
            for name in ["eca.omega2_pairing_n1", "eca.omega2_skew", "eca.moment_map_h2_level1"] {
                report.record(name, PAIRING_TOL, Err(e.clone()));
            }
        }
    }

    if let Some(gamma) = curve {
        let rep = gamma.validate(DEFAULT_DET_TOL);
        report.record("eca.curve_valid", DEFAULT_DET_TOL, Ok(vec![rep.max_det_defect]));
        if rep.ok {
            report.merge(eca_curve_suite(fx, gamma));
        }
    }
    report
}

fn random_sl2(rng: &mut impl Rng) -> Mat2 {
    // product of a rotation, a diagonal stretch and a shear: always det 1
    let th: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let d: f64 = rng.gen_range(0.5..2.0);
    let u: f64 = rng.gen_range(-1.0..1.0);
    let r = [[th.cos(), -th.sin()], [th.sin(), th.cos()]];
    let ds = [[d, 0.0], [0.0, 1.0 / d]];
    let sh = [[1.0, u], [0.0, 1.0]];
    crate::plane::mat_mul(&crate::plane::mat_mul(&r, &ds), &sh)
}

/// Checks that need a closed equicentroaffine curve.
pub fn eca_curve_suite<R: Rng>(fx: &mut Fixture<R>, gamma: &EcaCurve) -> CheckReport {
    let mut report = CheckReport::default();
    let kappa = gamma.curvature();
    let r = trials(fx.trials, |_| {
        let a = random_sl2(fx.rng);
        Ok(sl2_apply(&a, gamma)?.curvature().max_abs_diff(&kappa))
    });
    report.record("eca.sl2_invariance", INVARIANCE_TOL, r);

    let basis: [Mat2; 3] = [[[1.0, 0.0], [0.0, -1.0]], [[0.0, 1.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]];
    let tangents: Vec<EcaTangent> = (0..fx.trials).map(|_| EcaTangent::new(fx.field(0.1, 1.0))).collect();
    let free = LevelSetSpec::unconstrained();
    let r = (|| {
        let mut out = Vec::new();
        for a in &basis {
            let v = sl2_tangent(a, gamma)?;
            for t in &tangents {
                out.push(omega_k(&kappa, &v, t, 1, &free)?.abs());
            }
        }
        Ok(out)
    })();
    report.record("eca.sl2_annihilation", PAIRING_TOL, r);

    let r = LevelSetSpec::through(&kappa, 1).and_then(|level| {
        trials(fx.trials, |j| {
            let a = project_level_tangent(&kappa, &tangents[j].alpha, &level)?;
            let b = project_level_tangent(&kappa, &tangents[(j + 1) % tangents.len()].alpha.shift(0.7), &level)?;
            Ok(rel(omega_k(&kappa, &a, &b, 2, &level)?, phi_form(gamma, &a, &b, 2, DEFAULT_MEAN_TOL)?))
        })
    });
    report.record("eca.phi_form_k2", PAIRING_TOL, r);
    report
}

fn euc_tangents<R: Rng>(fx: &mut Fixture<R>, kappa_hat: &RealField) -> Result<Vec<EucTangent>> {
    (0..fx.trials)
        .map(|_| {
            let mu = fx.field(0.0, 1.0);
            let lambda_mean = fx.rng.gen_range(-0.5..0.5);
            EucTangent::from_mu_projected(kappa_hat, &mu, lambda_mean)
        })
        .collect()
}

/// Pairings and moment map at `kappa_hat`; rigid-motion invariance when a
/// curve is given.
pub fn euclid_suite<R: Rng>(fx: &mut Fixture<R>, kappa_hat: &RealField, curve: Option<&EucCurve>) -> CheckReport {
    let mut report = CheckReport::default();
    let free = LevelSetSpec::unconstrained();
    let setup = euc_tangents(fx, kappa_hat).and_then(|t| Ok((t, mkdv_pairs(kappa_hat, 3)?)));
    match setup {
        Ok((tangents, pairs)) => {
            for (k, orders) in [(0usize, 1..=3usize), (1, 1..=2)] {
                for n in orders {
                    let r = trials(fx.trials, |j| {
                        let form = omega_hat_k(kappa_hat, &pairs[n - 1], &tangents[j], k, &free)?;
                        Ok(rel(form, differential_h_hat(kappa_hat, n + k, &tangents[j])?))
                    });
                    report.record(&format!("euclid.omega_hat{k}_pairing_n{n}"), PAIRING_TOL, r);
                }
            }
            let rep = EucTangent::new(RealField::constant(kappa_hat.grid(), 1.0), RealField::zeros(kappa_hat.grid()));
            let r = rep.and_then(|rep| {
                trials(fx.trials, |j| {
                    Ok(rel(
                        omega_hat_k(kappa_hat, &rep, &tangents[j], 1, &free)?,
                        differential_h_hat(kappa_hat, 1, &tangents[j])?,
                    ))
                })
            });
            report.record("euclid.moment_map_h1", PAIRING_TOL, r);
        }
        Err(e) => report.record("euclid.setup", PAIRING_TOL, Err(e)),
    }
    if let Some(gamma) = curve {
        let rep = gamma.validate(DEFAULT_SPEED_TOL);
        report.record("euclid.curve_valid", DEFAULT_SPEED_TOL, Ok(vec![rep.max_speed_defect]));
        if rep.ok {
            let k = gamma.curvature();
            let r = trials(fx.trials, |_| {
                let r = rotation(fx.rng.gen_range(0.0..std::f64::consts::TAU));
                let v = [fx.rng.gen_range(-2.0..2.0), fx.rng.gen_range(-2.0..2.0)];
                Ok(e2_apply(&r, v, gamma)?.curvature().max_abs_diff(&k))
            });
            report.record("euclid.e2_invariance", INVARIANCE_TOL, r);
        }
    }
    report
}

/// Flow-conjugacy parameters for [`miura_suite`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConjugacyRun {
    pub n: usize,
    pub t_final: f64,
    pub dt: f64,
}

/// Miura identities at `kappa_hat`.
pub fn miura_suite<R: Rng>(fx: &mut Fixture<R>, kappa_hat: &RealField, conjugacy: Option<ConjugacyRun>) -> CheckReport {
    let mut report = CheckReport::default();
    let kappa = miura_curvature(kappa_hat);
    let direct = (kappa_hat * kappa_hat) * 0.25;
    let relation = kappa.re().max_abs_diff(&direct).max(kappa.im().max_abs_diff(&(kappa_hat.ds() * 0.5)));
    report.record("miura.curvature_relation", 1e-12, Ok(vec![relation]));

    let r = trials(fx.trials, |_| {
        let raw = random_complex_band_limited(&fx.grid, fx.rng, fx.max_mode, Complex64::new(0.0, 0.0), 1.0);
        let f = admissible_intertwine_input(kappa_hat, &raw);
        let (lhs, rhs) = intertwine_sides(kappa_hat, &f)?;
        Ok(lhs.max_abs_diff(&rhs) / (1.0 + lhs.max_abs().max(rhs.max_abs())))
    });
    report.record("miura.intertwining", PAIRING_TOL, r);

    for m in 1..=3 {
        let r = pullback_hamiltonian_residual(kappa_hat, m).map(|p| vec![p.residual.max(p.imaginary)]);
        report.record(&format!("miura.pullback_h{m}"), PAIRING_TOL, r);
    }
    let free = LevelSetSpec::unconstrained();
    match euc_tangents(fx, kappa_hat) {
        Ok(t) => {
            for k in 0..=1 {
                let r = trials(fx.trials, |j| {
                    let other = &t[(j + 1) % t.len()];
                    let direct = omega_hat_k(kappa_hat, &t[j], other, k, &free)?;
                    let pulled = pullback_omega(kappa_hat, &t[j], other, k)?;
                    Ok(rel(direct, pulled.re).max(pulled.im.abs()))
                });
                report.record(&format!("miura.omega_pullback_k{k}"), PAIRING_TOL, r);
            }
        }
        Err(e) => report.record("miura.setup", PAIRING_TOL, Err(e)),
    }
    if let Some(run) = conjugacy {
        let r = flow_conjugacy_residual(kappa_hat, run.n, run.t_final, run.dt, Scheme::STIFF).map(|v| vec![v]);
        report.record(&format!("miura.conjugacy_n{}", run.n), CONJUGACY_TOL, r);
    }
    report
}

/// Error for a failed check report, listing the failures.
pub fn failures_error(report: &CheckReport) -> Option<Error> {
    let failed = report.failures();
    (!failed.is_empty()).then(|| Error::Config(format!("failed checks: {}", failed.join(", "))))
}

//! Time integration of the KdV and mKdV hierarchies at curvature and curve
//! level, with conserved-quantity tracking.

pub mod experiments;
pub mod spec;
pub mod stepper;

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::calculus::{ComplexField, PeriodicField, RealField, Scalar};
use crate::eca::curve::{tangent_embed, EcaCurve};
use crate::eca::hierarchy::{hamiltonian, kdv_velocity, xn_field};
use crate::euclid::curve::{euc_tangent_embed, EucCurve};
use crate::euclid::hierarchy::{hamiltonian_hat, mkdv_velocity, xhat_n_field};
use crate::error::{Error, Result};
use crate::plane::PlaneField;

pub use experiments::{commutativity_residual, curve_curvature_consistency, flow_conjugacy_residual, ConsistencyReport};
pub use spec::{FlowSpec, Integrator, Model, Representation, Scheme, BLOWUP_THRESHOLD, CONSTRAINT_DRIFT_LIMIT};
pub use stepper::{max_stable_dt, FlowVector};

use stepper::{check_blowup, if_rk4_step, linear_symbol, rk4_step, spectral_radius, Propagators, Rhs};

/// Number of conserved quantities tracked per run.
pub const TRACKED_HAMILTONIANS: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub enum FlowState {
    /// Real curvature; `eca` or `euclidean` model.
    Curvature(RealField),
    /// Complex curvature; `eca_complex` model.
    ComplexCurvature(ComplexField),
    Eca(EcaCurve),
    Euc(EucCurve),
}

#[derive(Debug, Clone, PartialEq)]
pub enum FlowDerivative {
    Real(RealField),
    Complex(ComplexField),
    Plane(PlaneField),
}

impl FlowState {
    pub fn n_points(&self) -> usize {
        match self {
            FlowState::Curvature(k) => k.n_points(),
            FlowState::ComplexCurvature(k) => k.n_points(),
            FlowState::Eca(g) => g.grid().n_points(),
            FlowState::Euc(g) => g.grid().n_points(),
        }
    }

    fn check_matches(&self, spec: &FlowSpec) -> Result<()> {
        let ok = matches!(
            (self, spec.model, spec.representation),
            (FlowState::Curvature(_), Model::Eca | Model::Euclidean, Representation::Curvature)
                | (FlowState::ComplexCurvature(_), Model::EcaComplex, Representation::Curvature)
                | (FlowState::Eca(_), Model::Eca, Representation::Curve)
                | (FlowState::Euc(_), Model::Euclidean, Representation::Curve)
        );
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidSpec(format!(
                "state does not match model {:?} with representation {:?}",
                spec.model, spec.representation
            )))
        }
    }
}

fn eca_curve(p: &PlaneField) -> Result<EcaCurve> {
    EcaCurve::from_plane(p.clone())
}

fn euc_curve(p: &PlaneField) -> EucCurve {
    EucCurve::from_plane(p.clone())
}

fn constraint_defect(model: Model, p: &PlaneField) -> f64 {
    let t = p.ds();
    let d = match model {
        Model::Euclidean => t.dot(&t),
        _ => p.det(&t),
    };
    d.add_constant(-1.0).max_abs()
}

fn check_constraint(model: Model, p: &PlaneField, time: f64) -> Result<f64> {
    let defect = constraint_defect(model, p);
    if !(defect <= CONSTRAINT_DRIFT_LIMIT) {
        return Err(Error::ConstraintDrift { defect, time });
    }
    Ok(defect)
}

fn real_rhs(model: Model, n: usize, k: &RealField) -> Result<RealField> {
    match model {
        Model::Euclidean => mkdv_velocity(k, n),
        _ => kdv_velocity(k, n),
    }
}

fn curve_rhs(model: Model, n: usize, p: &PlaneField) -> Result<PlaneField> {
    match model {
        Model::Euclidean => {
            let g = euc_curve(p);
            euc_tangent_embed(&g, &xhat_n_field(&g, n)?)
        }
        _ => {
            let g = eca_curve(p)?;
            tangent_embed(&g, &xn_field(&g, n)?)
        }
    }
}

/// Right-hand side of the `n`-th flow: `Ω^n κ_s` (resp. `Ω̂^n κ̂_s`) for
/// curvature states, the embedded `X_n` (resp. `X̂_n`) for curves.
///
/// Curve states whose det/speed defect exceeds [`CONSTRAINT_DRIFT_LIMIT`]
/// are rejected; the reported time is 0 outside of [`evolve`].
pub fn rhs(state: &FlowState, spec: &FlowSpec) -> Result<FlowDerivative> {
    state.check_matches(spec)?;
    let n = spec.hierarchy_n;
    match state {
        FlowState::Curvature(k) => Ok(FlowDerivative::Real(real_rhs(spec.model, n, k)?)),
        FlowState::ComplexCurvature(k) => Ok(FlowDerivative::Complex(kdv_velocity(k, n)?)),
        FlowState::Eca(g) => {
            check_constraint(spec.model, g.as_plane(), 0.0)?;
            Ok(FlowDerivative::Plane(curve_rhs(spec.model, n, g.as_plane())?))
        }
        FlowState::Euc(g) => {
            check_constraint(spec.model, g.as_plane(), 0.0)?;
            Ok(FlowDerivative::Plane(curve_rhs(spec.model, n, g.as_plane())?))
        }
    }
}

/// Drift of one tracked quantity over a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantityDrift {
    pub name: String,
    pub initial: f64,
    /// Imaginary part of the initial value; zero for real models.
    pub initial_imag: f64,
    pub max_abs_drift: f64,
    pub max_rel_drift: f64,
}

/// One snapshot's worth of tracked values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantRow {
    pub t: f64,
    /// Real parts of `H_1..H_3` (or `Ĥ_1..Ĥ_3`).
    pub values: Vec<f64>,
    /// Imaginary parts; empty for real models.
    pub imag: Vec<f64>,
    /// `max|det(γ,γ_s) − 1|` or `max||γ̂_s|² − 1|`; zero in curvature mode.
    pub defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    /// Hamiltonians first, then `defect` in curve mode. The defect's
    /// relative drift is measured against the constraint value 1.
    pub quantities: Vec<QuantityDrift>,
    pub rows: Vec<InvariantRow>,
}

impl InvariantReport {
    fn from_rows(rows: Vec<InvariantRow>, curve_mode: bool, hat: bool) -> Self {
        let mut quantities = Vec::new();
        if let Some(first) = rows.first() {
            let prefix = if hat { "Hhat" } else { "H" };
            for (j, &v0) in first.values.iter().enumerate() {
                let im0 = first.imag.get(j).copied().unwrap_or(0.0);
                let max_abs_drift = rows
                    .iter()
                    .map(|r| {
                        let im = r.imag.get(j).copied().unwrap_or(0.0);
                        Complex64::new(r.values[j] - v0, im - im0).norm()
                    })
                    .fold(0.0, f64::max);
                let size = Complex64::new(v0, im0).norm();
                quantities.push(QuantityDrift {
                    name: format!("{prefix}{}", j + 1),
                    initial: v0,
                    initial_imag: im0,
                    max_abs_drift,
                    max_rel_drift: max_abs_drift / size.max(f64::EPSILON),
                });
            }
            if curve_mode {
                let d0 = first.defect;
                let max_abs_drift = rows.iter().map(|r| (r.defect - d0).abs()).fold(0.0, f64::max);
                quantities.push(QuantityDrift {
                    name: "defect".into(),
                    initial: d0,
                    initial_imag: 0.0,
                    max_abs_drift,
                    max_rel_drift: max_abs_drift,
                });
            }
        }
        InvariantReport { quantities, rows }
    }

    pub fn quantity(&self, name: &str) -> Option<&QuantityDrift> {
        self.quantities.iter().find(|q| q.name == name)
    }

    /// Largest relative drift among the Hamiltonians.
    pub fn max_hamiltonian_rel_drift(&self) -> f64 {
        self.quantities
            .iter()
            .filter(|q| q.name != "defect")
            .map(|q| q.max_rel_drift)
            .fold(0.0, f64::max)
    }

    /// CSV with columns `t,H1,H2,H3,defect`; complex runs append
    /// `H1_im,H2_im,H3_im`.
    pub fn to_csv(&self) -> String {
        let complex = self.rows.first().is_some_and(|r| !r.imag.is_empty());
        let mut out = String::from("t");
        for j in 1..=TRACKED_HAMILTONIANS {
            let _ = write!(out, ",H{j}");
        }
        out.push_str(",defect");
        if complex {
            for j in 1..=TRACKED_HAMILTONIANS {
                let _ = write!(out, ",H{j}_im");
            }
        }
        out.push('\n');
        for r in &self.rows {
            let _ = write!(out, "{:.16e}", r.t);
            for v in &r.values {
                let _ = write!(out, ",{v:.16e}");
            }
            let _ = write!(out, ",{:.16e}", r.defect);
            for v in &r.imag {
                let _ = write!(out, ",{v:.16e}");
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub spec: FlowSpec,
    pub times: Vec<f64>,
    pub states: Vec<FlowState>,
    pub invariants: InvariantReport,
    /// Spectral radius estimate used for the stability check.
    pub spectral_radius: f64,
    pub max_stable_dt: f64,
}

impl TrajectoryRecord {
    pub fn final_state(&self) -> &FlowState {
        self.states.last().expect("a trajectory always holds the initial state")
    }
}

fn observe_real(model: Model, k: &RealField, t: f64, defect: f64) -> Result<InvariantRow> {
    let values = (1..=TRACKED_HAMILTONIANS)
        .map(|m| match model {
            Model::Euclidean => hamiltonian_hat(k, m),
            _ => hamiltonian(k, m),
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(InvariantRow {
        t,
        values,
        imag: Vec::new(),
        defect,
    })
}

fn observe_complex(k: &ComplexField, t: f64) -> Result<InvariantRow> {
    let h = (1..=TRACKED_HAMILTONIANS)
        .map(|m| hamiltonian(k, m))
        .collect::<Result<Vec<Complex64>>>()?;
    Ok(InvariantRow {
        t,
        values: h.iter().map(|z| z.re).collect(),
        imag: h.iter().map(|z| z.im).collect(),
        defect: 0.0,
    })
}

struct Driver<'a, V> {
    spec: &'a FlowSpec,
    rhs: &'a Rhs<'a, V>,
    /// Linear symbol for the integrating-factor scheme.
    symbol: Option<Vec<Complex64>>,
    /// Lower bound on the spectral radius; the power iteration can miss
    /// modes it was never seeded with.
    rho_floor: f64,
    /// Constraint defect, checked on every accepted state.
    constraint: Option<&'a dyn Fn(&V, f64) -> Result<f64>>,
    observe: &'a dyn Fn(&V, f64, f64) -> Result<InvariantRow>,
    n_points: usize,
}

struct Run<V> {
    times: Vec<f64>,
    states: Vec<V>,
    rows: Vec<InvariantRow>,
    rho: f64,
    max_dt: f64,
}

impl<V: FlowVector> Driver<'_, V> {
    fn run(&self, u0: V) -> Result<Run<V>> {
        let spec = self.spec;
        let n_steps = spec.n_steps();
        let dt = spec.step_size();

        let (rho, nonlinear): (f64, Option<Box<Rhs<V>>>) = match &self.symbol {
            None => (spectral_radius(&u0, self.rhs)?, None),
            Some(symbol) => {
                let symbol = symbol.clone();
                let f = self.rhs;
                let n: Box<Rhs<V>> = Box::new(move |u: &V| Ok(f(u)?.axpy(-1.0, &u.multiply_symbol(&symbol))));
                (spectral_radius(&u0, n.as_ref())?, Some(n))
            }
        };
        let rho = rho.max(self.rho_floor);
        let max_dt = max_stable_dt(rho, spec.stability_safety);
        if n_steps > 0 && dt > max_dt {
            return Err(Error::Stability { dt, max_dt });
        }
        let propagators = self.symbol.as_ref().map(|s| Propagators::new(s, dt));

        let interval = spec.record_interval();
        let cutoff = spec.dealias.then(|| spec.dealias_cutoff(self.n_points));
        let mut u = u0;
        let defect0 = match self.constraint {
            Some(c) => c(&u, 0.0)?,
            None => 0.0,
        };
        let mut run = Run {
            times: vec![0.0],
            rows: vec![(self.observe)(&u, 0.0, defect0)?],
            states: vec![u.clone()],
            rho,
            max_dt,
        };
        for step in 1..=n_steps {
            u = match (&nonlinear, &propagators) {
                (Some(n), Some(p)) => if_rk4_step(&u, dt, p, n.as_ref())?,
                _ => rk4_step(&u, dt, self.rhs)?,
            };
            if let Some(max_k) = cutoff {
                u = u.truncate(max_k);
            }
            let t = if step == n_steps { spec.t_final } else { step as f64 * dt };
            check_blowup(&u, t)?;
            let defect = match self.constraint {
                Some(c) => c(&u, t)?,
                None => 0.0,
            };
            if step % interval == 0 || step == n_steps {
                run.times.push(t);
                run.rows.push((self.observe)(&u, t, defect)?);
                run.states.push(u.clone());
            }
        }
        Ok(run)
    }
}

fn explicit_floor(symbol: &[Complex64], if_rk4: bool) -> f64 {
    if if_rk4 {
        0.0
    } else {
        symbol.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

fn mean_state<T: Scalar>(u: &PeriodicField<T>) -> PeriodicField<T> {
    PeriodicField::constant(u.grid(), u.mean())
}

/// Integrate `spec` from `initial` with fixed steps.
///
/// The step is checked against the RK4 stability limit for the spectral
/// radius of the linearized right-hand side at `t = 0` (of its nonlinear
/// remainder under the integrating-factor scheme) before any step is taken.
pub fn evolve(initial: &FlowState, spec: &FlowSpec) -> Result<TrajectoryRecord> {
    spec.validate()?;
    initial.check_matches(spec)?;
    let n = spec.hierarchy_n;
    let model = spec.model;
    let if_rk4 = spec.integrator == Integrator::IntegratingFactorRk4;

    let (times, states, rows, rho, max_dt) = match initial {
        FlowState::Curvature(k0) => {
            let f = move |k: &RealField| real_rhs(model, n, k);
            let symbol = linear_symbol(&mean_state(k0), &f)?;
            let observe = move |k: &RealField, t: f64, _: f64| observe_real(model, k, t, 0.0);
            let driver = Driver {
                spec,
                rhs: &f,
                rho_floor: explicit_floor(&symbol, if_rk4),
                symbol: if_rk4.then_some(symbol),
                constraint: None,
                observe: &observe,
                n_points: initial.n_points(),
            };
            let run = driver.run(k0.clone())?;
            let states = run.states.into_iter().map(FlowState::Curvature).collect();
            (run.times, states, run.rows, run.rho, run.max_dt)
        }
        FlowState::ComplexCurvature(k0) => {
            let f = move |k: &ComplexField| kdv_velocity(k, n);
            let symbol = linear_symbol(&mean_state(k0), &f)?;
            let observe = |k: &ComplexField, t: f64, _: f64| observe_complex(k, t);
            let driver = Driver {
                spec,
                rhs: &f,
                rho_floor: explicit_floor(&symbol, if_rk4),
                symbol: if_rk4.then_some(symbol),
                constraint: None,
                observe: &observe,
                n_points: initial.n_points(),
            };
            let run = driver.run(k0.clone())?;
            let states = run.states.into_iter().map(FlowState::ComplexCurvature).collect();
            (run.times, states, run.rows, run.rho, run.max_dt)
        }
        FlowState::Eca(_) | FlowState::Euc(_) => {
            let p0 = match initial {
                FlowState::Eca(g) => g.as_plane().clone(),
                FlowState::Euc(g) => g.as_plane().clone(),
                _ => unreachable!(),
            };
            let f = move |p: &PlaneField| curve_rhs(model, n, p);
            let constraint = move |p: &PlaneField, t: f64| check_constraint(model, p, t);
            let observe = move |p: &PlaneField, t: f64, defect: f64| {
                let k = match model {
                    Model::Euclidean => euc_curve(p).curvature(),
                    _ => eca_curve(p)?.curvature(),
                };
                observe_real(model, &k, t, defect)
            };
            let driver = Driver {
                spec,
                rhs: &f,
                symbol: None,
                rho_floor: 0.0,
                constraint: Some(&constraint),
                observe: &observe,
                n_points: initial.n_points(),
            };
            let run = driver.run(p0)?;
            let states = run
                .states
                .into_iter()
                .map(|p| match model {
                    Model::Euclidean => Ok(FlowState::Euc(euc_curve(&p))),
                    _ => Ok(FlowState::Eca(eca_curve(&p)?)),
                })
                .collect::<Result<Vec<_>>>()?;
            (run.times, states, run.rows, run.rho, run.max_dt)
        }
    };
    let curve_mode = spec.representation == Representation::Curve;
    Ok(TrajectoryRecord {
        spec: spec.clone(),
        times,
        states,
        invariants: InvariantReport::from_rows(rows, curve_mode, model == Model::Euclidean),
        spectral_radius: rho,
        max_stable_dt: max_dt,
    })
}

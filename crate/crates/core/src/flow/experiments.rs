//! Composite runs that compare independent integrations against each other.

use serde::{Deserialize, Serialize};

use crate::calculus::{ComplexField, RealField};
use crate::error::{Error, Result};
use crate::flow::{evolve, FlowSpec, FlowState, Integrator, Model, Representation, Scheme};
use crate::miura::miura_curvature;

/// Evolve and keep only the endpoint.
fn endpoint(state: &FlowState, spec: FlowSpec) -> Result<FlowState> {
    let every = spec.n_steps().max(1);
    let rec = evolve(state, &spec.with_record_every(every))?;
    Ok(rec.states.into_iter().last().expect("initial state is always recorded"))
}

fn real_endpoint(k0: &RealField, model: Model, n: usize, t: f64, dt: f64, scheme: Scheme) -> Result<RealField> {
    let spec = FlowSpec::new(model, Representation::Curvature, n, t, dt).with_scheme(scheme);
    match endpoint(&FlowState::Curvature(k0.clone()), spec)? {
        FlowState::Curvature(k) => Ok(k),
        _ => unreachable!("curvature runs return curvature states"),
    }
}

fn complex_endpoint(k0: &ComplexField, n: usize, t: f64, dt: f64, scheme: Scheme) -> Result<ComplexField> {
    let spec = FlowSpec::new(Model::EcaComplex, Representation::Curvature, n, t, dt).with_scheme(scheme);
    match endpoint(&FlowState::ComplexCurvature(k0.clone()), spec)? {
        FlowState::ComplexCurvature(k) => Ok(k),
        _ => unreachable!("curvature runs return curvature states"),
    }
}

/// Max difference between flowing `κ₀` by `n1` then `n2` and by `n2` then
/// `n1`, each for time `t_each`.
pub fn commutativity_residual(
    kappa0: &RealField,
    n1: usize,
    n2: usize,
    t_each: f64,
    dt: f64,
    scheme: Scheme,
) -> Result<f64> {
    let flow = |k: &RealField, n| real_endpoint(k, Model::Eca, n, t_each, dt, scheme);
    let a = flow(&flow(kappa0, n1)?, n2)?;
    let b = flow(&flow(kappa0, n2)?, n1)?;
    Ok(a.max_abs_diff(&b))
}

/// Outcome of [`curve_curvature_consistency`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    /// `max|κ(γ(t)) − κ(t)|` at the final time.
    pub residual: f64,
    /// Largest change in the det/speed defect along the curve run.
    pub constraint_drift: f64,
}

/// Evolve the curve under `X_n` (resp. `X̂_n`) and its curvature under the
/// curvature-level flow independently, then compare curvatures at `t_final`.
///
/// The curve run always uses classical RK4 (the integrating-factor scheme
/// has no curve form) and honours `scheme.dealias`; the curvature run uses
/// `scheme` as given.
pub fn curve_curvature_consistency(
    gamma0: &FlowState,
    n: usize,
    t_final: f64,
    dt: f64,
    scheme: Scheme,
) -> Result<ConsistencyReport> {
    let (model, kappa0) = match gamma0 {
        FlowState::Eca(g) => (Model::Eca, g.curvature()),
        FlowState::Euc(g) => (Model::Euclidean, g.curvature()),
        _ => return Err(Error::InvalidSpec("curve consistency needs a curve state".into())),
    };
    let curve_scheme = Scheme {
        integrator: Integrator::Rk4,
        dealias: scheme.dealias,
    };
    let spec = FlowSpec::new(model, Representation::Curve, n, t_final, dt).with_scheme(curve_scheme);
    let every = spec.n_steps().max(1);
    let rec = evolve(gamma0, &spec.with_record_every(every))?;
    let curvature = match rec.final_state() {
        FlowState::Eca(g) => g.curvature(),
        FlowState::Euc(g) => g.curvature(),
        _ => unreachable!("curve runs return curves"),
    };
    let constraint_drift = rec.invariants.quantity("defect").map_or(0.0, |q| q.max_abs_drift);
    let direct = real_endpoint(&kappa0, model, n, t_final, dt, scheme)?;
    Ok(ConsistencyReport {
        residual: curvature.max_abs_diff(&direct),
        constraint_drift,
    })
}

/// Evolve `κ̂₀` under the `n`-th mKdV flow and map it through the Miura
/// relation; separately evolve the Miura image of `κ̂₀` under the
/// complexified `n`-th KdV flow. Returns the max difference at `t_final`.
pub fn flow_conjugacy_residual(
    kappa_hat0: &RealField,
    n: usize,
    t_final: f64,
    dt: f64,
    scheme: Scheme,
) -> Result<f64> {
    let hat = real_endpoint(kappa_hat0, Model::Euclidean, n, t_final, dt, scheme)?;
    let kdv = complex_endpoint(&miura_curvature(kappa_hat0), n, t_final, dt, scheme)?;
    Ok(miura_curvature(&hat).max_abs_diff(&kdv))
}

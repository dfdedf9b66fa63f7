use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Snapshot budget used when `record_every` is not given.
pub const MAX_DEFAULT_SNAPSHOTS: usize = 1001;
/// Samples above this magnitude abort a run.
pub const BLOWUP_THRESHOLD: f64 = 1e8;
/// Curve-mode runs abort once the det/speed defect exceeds this.
pub const CONSTRAINT_DRIFT_LIMIT: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    /// Equicentroaffine curvature, KdV hierarchy.
    Eca,
    /// Euclidean curvature, mKdV hierarchy.
    Euclidean,
    /// Complex equicentroaffine curvature (image of the Miura map).
    EcaComplex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    Curvature,
    Curve,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    /// Classical fourth-order Runge–Kutta.
    #[default]
    Rk4,
    /// Lawson integrating-factor RK4; the linearization about the mean state is
    /// integrated exactly in Fourier space. Curvature representation only.
    IntegratingFactorRk4,
}

/// Integrator choice plus state filtering, for runs driven by the
/// experiment helpers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Scheme {
    #[serde(default)]
    pub integrator: Integrator,
    #[serde(default)]
    pub dealias: bool,
}

impl Scheme {
    /// Classical RK4 without filtering.
    pub const RK4: Scheme = Scheme {
        integrator: Integrator::Rk4,
        dealias: false,
    };
    /// Integrating-factor RK4 with dealiasing; the practical choice at 128
    /// points and above, and for `n ≥ 2`.
    pub const STIFF: Scheme = Scheme {
        integrator: Integrator::IntegratingFactorRk4,
        dealias: true,
    };
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSpec {
    pub model: Model,
    pub representation: Representation,
    pub hierarchy_n: usize,
    pub t_final: f64,
    pub dt: f64,
    #[serde(default)]
    pub record_every: Option<usize>,
    #[serde(default = "default_safety")]
    pub stability_safety: f64,
    #[serde(default)]
    pub integrator: Integrator,
    /// Truncate the state after every step to the modes that products of
    /// the right-hand side's degree cannot alias into; see
    /// [`FlowSpec::dealias_cutoff`].
    #[serde(default)]
    pub dealias: bool,
}

fn default_safety() -> f64 {
    0.9
}

impl FlowSpec {
    pub fn new(model: Model, representation: Representation, hierarchy_n: usize, t_final: f64, dt: f64) -> Self {
        FlowSpec {
            model,
            representation,
            hierarchy_n,
            t_final,
            dt,
            record_every: None,
            stability_safety: default_safety(),
            integrator: Integrator::Rk4,
            dealias: false,
        }
    }

    pub fn with_integrator(mut self, integrator: Integrator) -> Self {
        self.integrator = integrator;
        self
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.integrator = scheme.integrator;
        self.dealias = scheme.dealias;
        self
    }

    pub fn with_record_every(mut self, every: usize) -> Self {
        self.record_every = Some(every);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        if self.hierarchy_n == 0 {
            return bad("hierarchy_n must be positive".into());
        }
        if !(self.t_final >= 0.0) || !self.t_final.is_finite() {
            return bad(format!("t_final must be non-negative, got {}", self.t_final));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.stability_safety > 0.0 && self.stability_safety <= 1.0) {
            return bad(format!("stability_safety must lie in (0, 1], got {}", self.stability_safety));
        }
        if self.record_every == Some(0) {
            return bad("record_every must be positive".into());
        }
        if self.representation == Representation::Curve {
            if self.model == Model::EcaComplex {
                return bad("the complex model has no curve representation".into());
            }
            if self.integrator == Integrator::IntegratingFactorRk4 {
                return bad("the integrating-factor scheme needs the curvature representation".into());
            }
        }
        Ok(())
    }

    /// Number of fixed steps; the step is shrunk so that they end exactly at
    /// `t_final`.
    pub fn n_steps(&self) -> usize {
        if self.t_final == 0.0 {
            return 0;
        }
        (self.t_final / self.dt - 1e-9).ceil().max(1.0) as usize
    }

    pub fn step_size(&self) -> f64 {
        match self.n_steps() {
            0 => self.dt,
            n => self.t_final / n as f64,
        }
    }

    /// Polynomial degree of the right-hand side in the state variable.
    ///
    /// KdV: `Ω^n κ_s` has degree `n + 1` in κ. mKdV: degree `2n + 1` in κ̂.
    /// Curves: the curvature is quadratic in γ and the embedding multiplies
    /// by γ once more.
    pub fn nonlinearity_degree(&self) -> usize {
        let n = self.hierarchy_n;
        match (self.model, self.representation) {
            (Model::Euclidean, Representation::Curvature) => 2 * n + 1,
            (_, Representation::Curvature) => n + 1,
            (Model::Euclidean, Representation::Curve) => 2 * (2 * n + 1) + 1,
            (_, Representation::Curve) => 2 * (n + 1) + 1,
        }
    }

    /// Largest wavenumber kept when `dealias` is set on an `n_points` grid:
    /// `n_points/(p + 1)` for degree `p`, which is the 2/3 rule for
    /// quadratic terms.
    pub fn dealias_cutoff(&self, n_points: usize) -> f64 {
        n_points as f64 / (self.nonlinearity_degree() + 1) as f64
    }

    pub fn record_interval(&self) -> usize {
        self.record_every
            .unwrap_or_else(|| self.n_steps().div_ceil(MAX_DEFAULT_SNAPSHOTS - 1).max(1))
    }
}

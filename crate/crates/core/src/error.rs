use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid size {n}: must be even and at least 8")]
    InvalidGrid { n: usize },

    #[error("expected {expected} samples, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("non-finite sample at index {index}")]
    NonFinite { index: usize },

    #[error("fields live on different grids ({left} vs {right} points)")]
    GridMismatch { left: usize, right: usize },

    /// `D_s^{-1}` was applied to a function with non-zero mean. `step` is the
    /// power of the recursion operator at which the check failed, if any.
    #[error("antiderivative undefined: mean {mean} is not zero{}", step_suffix(*.step))]
    NonZeroMean { mean: Complex64, step: Option<usize> },

    #[error("vector field is not tangent to the curve space (constraint defect {defect:e})")]
    NotTangent { defect: f64 },

    #[error("tangent is not tangent to the level set: dH_{order} = {value:e}")]
    NotLevelTangent { order: usize, value: f64 },

    #[error("curve is not on the level set: H_{order} = {value} but the level is {target}")]
    NotOnLevelSet { order: usize, value: f64, target: f64 },

    #[error("order {order} is not supported here")]
    UnsupportedOrder { order: usize },

    #[error("constraint Gram matrix is degenerate (condition number {condition:e})")]
    DegenerateConstraint { condition: f64 },

    #[error("matrix is not unimodular (det = {det})")]
    NotUnimodular { det: f64 },

    #[error("matrix is not trace-free (trace = {trace})")]
    NotTraceFree { trace: f64 },

    #[error("matrix is not orthogonal (defect {defect:e})")]
    NotOrthogonal { defect: f64 },

    #[error("curvature does not close up: {0}")]
    NotClosed(ClosureFailure),

    #[error("curve passes through the origin at node {index}")]
    CurveThroughOrigin { index: usize },

    #[error("invalid curve: constraint defect {defect:e} exceeds {tolerance:e}")]
    InvalidCurve { defect: f64, tolerance: f64 },

    #[error("constraint drift {defect:e} at t = {time}")]
    ConstraintDrift { defect: f64, time: f64 },

    #[error("time step {dt:e} exceeds the stability bound {max_dt:e}")]
    Stability { dt: f64, max_dt: f64 },

    #[error("solution blew up at t = {time} (max |u| = {magnitude:e})")]
    Blowup { time: f64, magnitude: f64 },

    #[error("invalid flow specification: {0}")]
    InvalidSpec(String),

    #[error("{path}: {message}")]
    Io { path: String, message: String },

    #[error("{path}: malformed input: {message}")]
    Parse { path: String, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),
}

fn step_suffix(step: Option<usize>) -> String {
    match step {
        Some(k) => format!(" (at step {k})"),
        None => String::new(),
    }
}

/// Why a curvature function failed to produce a closed curve.
#[derive(Debug, Clone, PartialEq)]
pub enum ClosureFailure {
    /// Hill equation monodromy differs from the identity.
    Monodromy { matrix: [[f64; 2]; 2], defect: f64 },
    /// Turning-angle integration: non-integer rotation index or open curve.
    Euclidean {
        closure_defect: f64,
        rotation_index_defect: f64,
    },
}

impl std::fmt::Display for ClosureFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ClosureFailure::Monodromy { matrix, defect } => write!(
                f,
                "monodromy [[{}, {}], [{}, {}]] (|M - I| = {defect:e})",
                matrix[0][0], matrix[0][1], matrix[1][0], matrix[1][1]
            ),
            ClosureFailure::Euclidean {
                closure_defect,
                rotation_index_defect,
            } => write!(
                f,
                "closure defect {closure_defect:e}, rotation index defect {rotation_index_defect:e}"
            ),
        }
    }
}

//! Equicentroaffine curves and the KdV hierarchy.

pub mod curve;
pub mod forms;
pub mod group;
pub mod hierarchy;
pub mod hill;
pub mod level;

pub use curve::{
    eca_curvature, eca_validate, tangent_embed, tangent_extract, EcaCurve, EcaReport, EcaTangent,
    DEFAULT_DET_TOL, DEFAULT_TANGENT_TOL,
};
pub use forms::{bracket_k, lemma31, lemma31_residual, omega0, omega_k, phi_form};
pub use group::{s1_apply, sl2_apply, sl2_tangent};
pub use hierarchy::{
    curvature_variation, density, differential_h, gradient_g, hamiltonian, kdv_velocity, omega_ds,
    omega_op, omega_power, xn_field, OmegaPower,
};
pub use hill::{eca_from_curvature, solve_hill, HillSolution, DEFAULT_CLOSURE_TOL, DEFAULT_SUBSTEPS};
pub use level::{
    check_level_tangent, level_integrals, project_level_tangent, LevelSetSpec, DEFAULT_MEMBERSHIP_TOL,
};

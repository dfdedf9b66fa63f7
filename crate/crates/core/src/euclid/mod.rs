//! Unit-speed Euclidean curves and the mKdV hierarchy.

pub mod curve;
pub mod forms;
pub mod hierarchy;

pub use curve::{
    e2_apply, euc_curvature, euc_from_curvature, euc_tangent_embed, rotation, rotation_index, EucCurve,
    EucReport, EucTangent, DEFAULT_EUC_CLOSURE_TOL, DEFAULT_EUC_TANGENT_TOL, DEFAULT_SPEED_TOL,
};
pub use forms::{check_level_tangent_hat, omega_hat_k};
pub use hierarchy::{
    curvature_variation_hat, density_hat, differential_h_hat, differential_h_hat_fd, gradient_hat,
    hamiltonian_hat, mkdv_pairs, mkdv_velocity, omega_hat_op, omega_hat_tangent, xhat_n_field, FD_STEP,
};

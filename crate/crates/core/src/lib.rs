//! Numerical laboratory for the multi-Hamiltonian structure of the KdV and
//! mKdV hierarchies on spaces of closed plane curves.
//!
//! Curves and curvatures are sampled on a uniform periodic grid and all
//! derivatives are spectral, so identities hold to near machine precision for
//! well-resolved data.

// `!(x <= tol)` is used on purpose so that NaN fails every tolerance check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calculus;
pub mod checks;
pub mod cli;
pub mod eca;
pub mod error;
pub mod euclid;
pub mod flow;
pub mod io;
pub mod miura;
pub mod plane;
pub mod residual;
pub mod seeds;

pub use calculus::{ComplexField, PeriodicField, PeriodicGrid, RealField, Scalar};
pub use error::{ClosureFailure, Error, Result};
pub use residual::Comparison;

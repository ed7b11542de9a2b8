//! Nonlinear vacuum electrodynamics laboratory.
//!
//! Exterior-algebra kernel on Minkowski space ([`forms4d`]), Lagrangians
//! `L(X, Y)` with analytic derivatives ([`lagrangian`]), the constitutive map
//! and its Newton inversion ([`constitutive`]), exact travelling waves on a
//! magnetised background ([`exact`]), a (t, z) field solver ([`solver`]) and
//! time-of-flight experiments ([`tof`]). The `nled` binary is a thin CLI over
//! [`cli`]; the `examples/` directory has one runnable program per capability.

pub mod cli;
pub mod constitutive;
pub mod error;
pub mod exact;
pub mod forms4d;
pub mod lagrangian;
pub mod solver;
pub mod tof;

pub use error::{Error, Result};
pub use forms4d::{FieldPoint, TwoForm, Vec3};
pub use lagrangian::{LagrangianModel, ModelKind};

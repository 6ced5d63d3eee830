//! Parameter-to-solution maps and their Fréchet derivatives.
//!
//! Derivatives are computed as tangents of the discrete stepper: the linear
//! solves read the base trajectory at the same Runge–Kutta stage the nonlinear
//! solve used, so they differentiate the discrete map exactly.

mod mckv;
mod reaction;

pub use mckv::{
    jacobian_matrix, mckv_first_derivative, mckv_second_derivative, solve_mckv, solve_mckv_field, trilinear_t,
    Jacobian, McKVProblem, McKVTangent,
};
pub use reaction::{rd_linearisation, solve_rd, ReactionSpec};

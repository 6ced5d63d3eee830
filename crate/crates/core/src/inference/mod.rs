//! Data model, prior, likelihood and its derivatives, expected curvature and
//! the log-concave surrogate.

mod constants;
mod data;
mod likelihood;
mod prior;
mod surrogate;

pub use constants::{
    delta_n, eta, surrogate_radius, validate_constants, w_window, zeta_window, AssumptionInputs, ConstantsConfig,
    ConstantsReport, ConstraintCheck, Mode,
};
pub use data::{generate_data, Dataset, DatasetMeta, Design};
pub use likelihood::{estimate_c1, expected_neg_hessian, second_derivative_table, LikelihoodEval, LikelihoodModel};
pub use prior::{sample_prior, PriorSpec};
pub use surrogate::{
    cutoff, cutoff_prime, gamma_r, gamma_r_prime, gamma_tilde, gamma_tilde_prime, lambda_min, surrogate_loglik,
    SurrogateSpec,
};

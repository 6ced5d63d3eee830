//! Unadjusted Langevin Algorithm, ergodic averages and Wasserstein diagnostics.

mod chain;
mod wasserstein;

pub use chain::{
    default_step_size, ergodic_average, run_ula, ula_step, ula_update, ChainDiagnostics, ChainRun, ChainState,
    GaussianTarget, LogDensity, RunOptions, SurrogatePosterior,
};
pub use wasserstein::{min_cost_assignment, w2_diagnostics, w2_squared_1d, w2_squared_assignment, w2_squared_sliced};

//! Forward maps, Fréchet derivatives and Langevin posterior sampling for the
//! McKean–Vlasov equation `d_t rho = Lap rho + div(rho grad W * rho)` on the
//! periodic torus, plus a reaction–diffusion companion model.
//!
//! Module map:
//! - [`spectral`]: Fourier fields, the `tau_k` basis of `E_K`, calculus operators.
//! - [`parabolic`]: integrating-factor time steppers and trajectories.
//! - [`forward_maps`]: `W -> rho_W`, `R -> u_R` and their linearisations.
//! - [`stability`]: pseudo-linearisation, deconvolution margins, gradient stability.
//! - [`inference`]: data model, prior, likelihood, expected curvature, surrogate.
//! - [`sampler`]: Unadjusted Langevin Algorithm and Wasserstein diagnostics.

// `!(x > 0.0)` style guards are kept on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod forward_maps;
pub mod inference;
pub mod parabolic;
pub mod sampler;
pub mod spectral;
pub mod stability;

pub use error::{Error, Result};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::constants::delta_n;
use crate::spectral::{ek_modes, PotentialVec};

/// Truncated Gaussian prior on `E_K` with per-mode standard deviations
/// `(N delta_N^2)^{-1/2} (1 + |k|^2)^{-(alpha+1)/2}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    pub alpha: f64,
    pub k_max: usize,
    pub d: usize,
    pub n_data: usize,
    pub delta_n: f64,
    pub std: Vec<f64>,
}

impl PriorSpec {
    pub fn new(alpha: f64, k_max: usize, d: usize, n_data: usize) -> Self {
        let delta = delta_n(alpha, d, n_data);
        let scale = (n_data as f64 * delta * delta).sqrt().recip();
        let std =
            ek_modes(k_max, d).iter().map(|k| scale * (1.0 + k.norm_sq() as f64).powf(-(alpha + 1.0) / 2.0)).collect();
        PriorSpec { alpha, k_max, d, n_data, delta_n: delta, std }
    }

    pub fn dim(&self) -> usize {
        self.std.len()
    }

    pub fn variances(&self) -> Vec<f64> {
        self.std.iter().map(|s| s * s).collect()
    }

    /// Diagonal of `Sigma^{-1}`.
    pub fn precision(&self) -> Vec<f64> {
        self.std.iter().map(|s| 1.0 / (s * s)).collect()
    }

    /// `theta^T Sigma^{-1} theta`.
    pub fn quadratic_form(&self, theta: &[f64]) -> f64 {
        theta.iter().zip(&self.std).map(|(t, s)| (t / s) * (t / s)).sum()
    }
}

pub fn sample_prior(prior: &PriorSpec, rng: &mut impl Rng) -> PotentialVec {
    let values = prior.std.iter().map(|s| s * rng.sample::<f64, _>(StandardNormal)).collect();
    PotentialVec::new(prior.k_max, prior.d, values).expect("length matches E_K")
}

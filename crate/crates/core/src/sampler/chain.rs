use std::fs::File;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::{surrogate_loglik, LikelihoodModel, PriorSpec, SurrogateSpec};
use crate::spectral::PotentialVec;

/// Target of the chain: `log p` up to a constant and its gradient (the drift).
pub trait LogDensity {
    fn dim(&self) -> usize;
    fn log_density_and_drift(&self, theta: &[f64]) -> Result<(f64, Vec<f64>)>;
}

/// Centred Gaussian with diagonal covariance.
#[derive(Clone, Debug)]
pub struct GaussianTarget {
    pub variances: Vec<f64>,
}

impl LogDensity for GaussianTarget {
    fn dim(&self) -> usize {
        self.variances.len()
    }

    fn log_density_and_drift(&self, theta: &[f64]) -> Result<(f64, Vec<f64>)> {
        let drift: Vec<f64> = theta.iter().zip(&self.variances).map(|(t, v)| -t / v).collect();
        let value = 0.5 * theta.iter().zip(&drift).map(|(t, g)| t * g).sum::<f64>();
        Ok((value, drift))
    }
}

/// `l~_N(W) - 1/2 W^T Sigma^{-1} W`.
pub struct SurrogatePosterior<'a> {
    pub model: &'a LikelihoodModel,
    pub prior: &'a PriorSpec,
    pub spec: &'a SurrogateSpec,
}

impl LogDensity for SurrogatePosterior<'_> {
    fn dim(&self) -> usize {
        self.prior.dim()
    }

    fn log_density_and_drift(&self, theta: &[f64]) -> Result<(f64, Vec<f64>)> {
        let w = PotentialVec::new(self.prior.k_max, self.prior.d, theta.to_vec())?;
        let (l, g) = surrogate_loglik(self.model, self.spec, &w)?;
        let precision = self.prior.precision();
        let drift = g.values().iter().zip(theta).zip(&precision).map(|((g, t), p)| g - p * t).collect();
        Ok((l - 0.5 * self.prior.quadratic_form(theta), drift))
    }
}

/// `gamma = 0.5 / (max Sigma^{-1} + 2 lambda)`.
pub fn default_step_size(prior: &PriorSpec, lambda: f64) -> f64 {
    let max_precision = prior.precision().into_iter().fold(0.0, f64::max);
    0.5 / (max_precision + 2.0 * lambda)
}

/// `theta + gamma drift + sqrt(2 gamma) xi`.
pub fn ula_update(theta: &[f64], drift: &[f64], gamma: f64, xi: &[f64]) -> Vec<f64> {
    let s = (2.0 * gamma).sqrt();
    theta.iter().zip(drift).zip(xi).map(|((t, g), x)| t + gamma * g + s * x).collect()
}

/// Current iterate with its private random stream.
#[derive(Clone, Debug)]
pub struct ChainState {
    pub theta: Vec<f64>,
    pub gamma: f64,
    pub k: usize,
    rng: ChaCha8Rng,
}

impl ChainState {
    pub fn new(theta: Vec<f64>, gamma: f64, seed: u64) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidArgument(format!("step size gamma = {gamma} must be positive")));
        }
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidArgument("initial iterate is not finite".into()));
        }
        Ok(ChainState { theta, gamma, k: 0, rng: ChaCha8Rng::seed_from_u64(seed) })
    }

    fn draw(&mut self) -> Vec<f64> {
        (0..self.theta.len()).map(|_| StandardNormal.sample(&mut self.rng)).collect()
    }
}

/// Advances the chain one step; returns `(log density, drift norm)` at the old iterate.
pub fn ula_step(state: &mut ChainState, target: &dyn LogDensity) -> Result<(f64, f64)> {
    let (value, drift) = target.log_density_and_drift(&state.theta)?;
    if drift.iter().any(|g| !g.is_finite()) || !value.is_finite() {
        return Err(Error::NonFiniteDrift { iteration: state.k, theta: state.theta.clone() });
    }
    let xi = state.draw();
    state.theta = ula_update(&state.theta, &drift, state.gamma, &xi);
    state.k += 1;
    Ok((value, drift.iter().map(|g| g * g).sum::<f64>().sqrt()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub gamma: f64,
    pub n_steps: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
}

impl RunOptions {
    /// Burn-in 20% of the steps, no thinning.
    pub fn new(gamma: f64, n_steps: usize, seed: u64) -> Self {
        RunOptions { gamma, n_steps, burn_in: n_steps / 5, thin: 1, seed }
    }
}

/// Per-run summaries; the energy trace is `-log p` at every iterate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainDiagnostics {
    pub options: RunOptions,
    pub energy: Vec<f64>,
    pub drift_norm: Vec<f64>,
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
    /// Batch-means standard error of the mean, per coordinate.
    pub mean_se: Vec<f64>,
    /// Batch-means standard error of the variance, per coordinate.
    pub variance_se: Vec<f64>,
    /// Integrated autocorrelation time estimate `(batch var / iid var)`.
    pub autocorrelation_time: Vec<f64>,
}

/// Kept samples after burn-in and thinning, with diagnostics.
#[derive(Clone, Debug)]
pub struct ChainRun {
    pub samples: Vec<Vec<f64>>,
    pub burn_in: usize,
    pub kept: usize,
    pub diagnostics: ChainDiagnostics,
}

fn batch_stats(series: &[f64]) -> (f64, f64, f64) {
    let n = series.len();
    let mean = series.iter().sum::<f64>() / n as f64;
    let var = series.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n.max(2) - 1) as f64;
    let batches = (n as f64).sqrt().floor().max(1.0) as usize;
    let size = n / batches;
    if batches < 2 || size == 0 {
        return (mean, (var / n as f64).sqrt(), 1.0);
    }
    let means: Vec<f64> =
        (0..batches).map(|b| series[b * size..(b + 1) * size].iter().sum::<f64>() / size as f64).collect();
    let grand = means.iter().sum::<f64>() / batches as f64;
    let bvar = means.iter().map(|m| (m - grand) * (m - grand)).sum::<f64>() / (batches - 1) as f64;
    let se = (bvar / batches as f64).sqrt();
    let tau = if var > 0.0 { size as f64 * bvar / var } else { 1.0 };
    (mean, se, tau)
}

pub fn run_ula(target: &dyn LogDensity, w_init: &[f64], options: RunOptions) -> Result<ChainRun> {
    let RunOptions { gamma, n_steps, burn_in, thin, seed } = options;
    if n_steps <= burn_in || thin == 0 {
        return Err(Error::InvalidArgument(format!(
            "need n_steps > burn_in and thin >= 1 (n_steps = {n_steps}, burn_in = {burn_in}, thin = {thin})"
        )));
    }
    if w_init.len() != target.dim() {
        return Err(Error::InvalidArgument("initial iterate has the wrong dimension".into()));
    }
    let mut state = ChainState::new(w_init.to_vec(), gamma, seed)?;
    let mut energy = Vec::with_capacity(n_steps);
    let mut drift_norm = Vec::with_capacity(n_steps);
    let mut samples = Vec::with_capacity((n_steps - burn_in) / thin + 1);
    for step in 0..n_steps {
        let (value, norm) = ula_step(&mut state, target)?;
        energy.push(-value);
        drift_norm.push(norm);
        if step >= burn_in && (step - burn_in) % thin == 0 {
            samples.push(state.theta.clone());
        }
    }
    let dim = target.dim();
    let mut mean = vec![0.0; dim];
    let mut variance = vec![0.0; dim];
    let mut mean_se = vec![0.0; dim];
    let mut variance_se = vec![0.0; dim];
    let mut autocorrelation_time = vec![0.0; dim];
    for j in 0..dim {
        let series: Vec<f64> = samples.iter().map(|s| s[j]).collect();
        let (m, se, tau) = batch_stats(&series);
        let centred: Vec<f64> = series.iter().map(|x| (x - m) * (x - m)).collect();
        let (v, vse, _) = batch_stats(&centred);
        mean[j] = m;
        mean_se[j] = se;
        variance[j] = v;
        variance_se[j] = vse;
        autocorrelation_time[j] = tau;
    }
    let kept = samples.len();
    Ok(ChainRun {
        samples,
        burn_in,
        kept,
        diagnostics: ChainDiagnostics {
            options,
            energy,
            drift_norm,
            mean,
            variance,
            mean_se,
            variance_se,
            autocorrelation_time,
        },
    })
}

/// `(1/J) sum_j H(theta_j)` over the kept samples.
pub fn ergodic_average(run: &ChainRun, h: impl Fn(&[f64]) -> Vec<f64>) -> Result<Vec<f64>> {
    let mut iter = run.samples.iter();
    let first = h(iter.next().ok_or(Error::EmptySamples)?);
    let mut acc = first;
    for s in iter {
        for (a, v) in acc.iter_mut().zip(h(s)) {
            *a += v;
        }
    }
    let n = run.samples.len() as f64;
    Ok(acc.into_iter().map(|a| a / n).collect())
}

impl ChainRun {
    /// Writes kept samples as CSV (`theta_1..theta_D`) and diagnostics as JSON.
    pub fn write(&self, samples_path: &Path, diagnostics_path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(samples_path)?;
        let dim = self.samples.first().map_or(0, Vec::len);
        w.write_record((1..=dim).map(|j| format!("theta_{j}")))?;
        for s in &self.samples {
            w.write_record(s.iter().map(|v| format!("{v:e}")))?;
        }
        w.flush()?;
        serde_json::to_writer_pretty(File::create(diagnostics_path)?, &self.diagnostics)?;
        Ok(())
    }
}

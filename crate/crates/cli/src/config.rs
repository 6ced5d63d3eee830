//! Experiment configuration (TOML). See the README for the schema and units.

use std::path::{Path, PathBuf};

use mfinv::forward_maps::{McKVProblem, ReactionSpec};
use mfinv::inference::{ConstantsConfig, Mode};
use mfinv::parabolic::{Scheme, StepperConfig};
use mfinv::spectral::{ek_modes, Grid, PotentialVec, SpectralField};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::Failure;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default)]
    pub mode: Mode,
    pub problem: ProblemBlock,
    #[serde(default)]
    pub solver: SolverBlock,
    #[serde(default)]
    pub constants: ConstantsBlock,
    #[serde(default)]
    pub inference: InferenceBlock,
    #[serde(default)]
    pub surrogate: SurrogateBlock,
    #[serde(default)]
    pub sampler: SamplerBlock,
    #[serde(default)]
    pub reaction: Option<ReactionBlock>,
}

fn default_out() -> PathBuf {
    PathBuf::from("mfinv-out")
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemBlock {
    pub d: usize,
    #[serde(default = "default_grid")]
    pub grid: usize,
    pub k_max: usize,
    pub t_end: f64,
    pub phi: PhiSpec,
    pub w0: W0Spec,
}

fn default_grid() -> usize {
    64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum PhiSpec {
    /// `phi = 1`.
    Uniform,
    /// `phi_k = amplitude |k|^-zeta` for every resolved `k != 0`.
    Decay { amplitude: f64, zeta: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum W0Spec {
    Zero,
    /// Coefficients in the `E_K` mode order.
    Values {
        values: Vec<f64>,
    },
    /// Gaussian coefficients damped by `(1 + |k|^2)^-1`, rescaled to L2 norm `size`.
    Random {
        size: f64,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverBlock {
    pub steps: Option<usize>,
    #[serde(default = "default_scheme")]
    pub scheme: Scheme,
    #[serde(default = "default_pad")]
    pub pad: f64,
}

fn default_scheme() -> Scheme {
    Scheme::IfHeun
}

fn default_pad() -> f64 {
    1.5
}

impl Default for SolverBlock {
    fn default() -> Self {
        SolverBlock { steps: None, scheme: default_scheme(), pad: default_pad() }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConstantsBlock {
    pub alpha: f64,
    pub beta: f64,
    pub zeta: f64,
    pub w: f64,
    /// Constant in the lower bound on the tail weight.
    pub c_hat: f64,
    /// Local regularity constant; estimated from forward-map outputs when absent.
    pub c1: Option<f64>,
}

impl Default for ConstantsBlock {
    fn default() -> Self {
        ConstantsBlock { alpha: 78.0, beta: 6.0, zeta: 6.55, w: 39.5, c_hat: 0.01, c1: None }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InferenceBlock {
    pub n: usize,
    pub alpha: f64,
    pub noise_std: f64,
}

impl Default for InferenceBlock {
    fn default() -> Self {
        InferenceBlock { n: 2000, alpha: 1.0, noise_std: 0.05 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SurrogateBlock {
    pub r_tilde: f64,
    pub init: InitSpec,
}

impl Default for SurrogateBlock {
    fn default() -> Self {
        SurrogateBlock { r_tilde: 1.0, init: InitSpec::Oracle }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum InitSpec {
    /// Start at the truncated truth.
    Oracle,
    Values {
        values: Vec<f64>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Posterior,
    Prior,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplerBlock {
    pub steps: usize,
    pub burn_in: Option<usize>,
    pub thin: usize,
    pub gamma: Option<f64>,
    pub target: Target,
}

impl Default for SamplerBlock {
    fn default() -> Self {
        SamplerBlock { steps: 2500, burn_in: None, thin: 1, gamma: None, target: Target::Posterior }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ReactionBlock {
    Sine,
    Cosine,
    Linear { lambda: f64 },
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<(Self, String), Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: ExperimentConfig =
            toml::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
        Ok((cfg, text))
    }

    pub fn validate(&self) -> Result<(), Failure> {
        let p = &self.problem;
        let bad = |m: String| Err(Failure::Config(m));
        if !(1..=3).contains(&p.d) {
            return bad(format!("problem.d = {} must be 1, 2 or 3", p.d));
        }
        let top = p.grid.saturating_sub(1) / 2;
        if p.k_max == 0 || p.k_max > top {
            return bad(format!("problem.k_max = {} must lie in 1..={top} for grid {}", p.k_max, p.grid));
        }
        if !(p.t_end > 0.0 && p.t_end.is_finite()) {
            return bad(format!("problem.t_end = {} must be positive", p.t_end));
        }
        if let W0Spec::Values { values } = &p.w0 {
            let dim = ek_modes(p.k_max, p.d).len();
            if values.len() != dim {
                return bad(format!("problem.w0 has {} values, E_K has dimension {dim}", values.len()));
            }
        }
        if let InitSpec::Values { values } = &self.surrogate.init {
            if values.len() != self.dim() {
                return bad(format!("surrogate.init has {} values, expected {}", values.len(), self.dim()));
            }
        }
        if self.inference.n == 0 || !(self.inference.noise_std >= 0.0) || !(self.inference.alpha > 0.0) {
            return bad("inference needs n >= 1, noise_std >= 0 and alpha > 0".into());
        }
        if !(self.surrogate.r_tilde > 0.0) {
            return bad("surrogate.r_tilde must be positive".into());
        }
        if self.sampler.steps == 0 || self.sampler.thin == 0 {
            return bad("sampler.steps and sampler.thin must be positive".into());
        }
        let phi = self.phi()?;
        let lowest = phi.to_padded_physical().into_iter().fold(f64::INFINITY, f64::min);
        if !(lowest > 0.0) {
            return bad(format!("initial density is not positive (min {lowest:.3e})"));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        ek_modes(self.problem.k_max, self.problem.d).len()
    }

    pub fn grid(&self) -> Result<Grid, Failure> {
        Ok(Grid::with_padding(self.problem.d, self.problem.grid, self.solver.pad)?)
    }

    pub fn stepper(&self) -> StepperConfig {
        let base = StepperConfig::for_horizon(self.problem.t_end);
        StepperConfig {
            steps: self.solver.steps.unwrap_or(base.steps),
            scheme: self.solver.scheme,
            pad: self.solver.pad,
            ..base
        }
    }

    pub fn phi(&self) -> Result<SpectralField, Failure> {
        let grid = self.grid()?;
        let mut phi = SpectralField::constant(grid, 1.0);
        if let PhiSpec::Decay { amplitude, zeta } = self.problem.phi {
            let modes: Vec<_> = phi.modes().map(|(k, _)| k).filter(|k| !k.is_zero()).collect();
            for k in modes {
                phi.set_coeff(&k, Complex64::new(amplitude * k.norm().powf(-zeta), 0.0))?;
            }
        }
        Ok(phi)
    }

    pub fn phi_label(&self) -> String {
        match self.problem.phi {
            PhiSpec::Uniform => "uniform".into(),
            PhiSpec::Decay { amplitude, zeta } => format!("decay amplitude={amplitude} zeta={zeta}"),
        }
    }

    pub fn is_uniform(&self) -> bool {
        self.problem.phi == PhiSpec::Uniform
    }

    pub fn w0(&self) -> Result<PotentialVec, Failure> {
        let (k, d) = (self.problem.k_max, self.problem.d);
        let w = match &self.problem.w0 {
            W0Spec::Zero => PotentialVec::zeros(k, d),
            W0Spec::Values { values } => PotentialVec::new(k, d, values.clone())?,
            W0Spec::Random { size } => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ 0x05ee_d0f7);
                let values: Vec<f64> = ek_modes(k, d)
                    .iter()
                    .map(|m| Distribution::<f64>::sample(&StandardNormal, &mut rng) / (1.0 + m.norm_sq() as f64))
                    .collect();
                let w = PotentialVec::new(k, d, values)?;
                let s = size / w.norm().max(f64::MIN_POSITIVE);
                w.with_values(w.values().iter().map(|v| v * s).collect())?
            }
        };
        Ok(w)
    }

    pub fn problem(&self) -> Result<McKVProblem, Failure> {
        Ok(McKVProblem::new(self.w0()?, self.phi()?, self.problem.t_end, self.stepper())?)
    }

    pub fn w_init(&self) -> Result<PotentialVec, Failure> {
        match &self.surrogate.init {
            InitSpec::Oracle => self.w0(),
            InitSpec::Values { values } => Ok(PotentialVec::new(self.problem.k_max, self.problem.d, values.clone())?),
        }
    }

    pub fn constants(&self) -> ConstantsConfig {
        let c = &self.constants;
        ConstantsConfig { d: self.problem.d, alpha: c.alpha, beta: c.beta, zeta: c.zeta, w: c.w, mode: self.mode }
    }

    pub fn reaction(&self) -> Option<ReactionSpec> {
        self.reaction.as_ref().map(|r| match r {
            ReactionBlock::Sine => ReactionSpec::sine(),
            ReactionBlock::Cosine => ReactionSpec::cosine(),
            ReactionBlock::Linear { lambda } => ReactionSpec::linear(*lambda),
        })
    }
}

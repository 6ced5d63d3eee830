//! Verification suites behind `mfinv verify` and `mfinv gradcheck`.

use mfinv::forward_maps::{solve_mckv, McKVProblem, McKVTangent};
use mfinv::inference::{
    gamma_r, gamma_tilde, generate_data, lambda_min, surrogate_loglik, LikelihoodModel, PriorSpec, SurrogateSpec,
};
use mfinv::parabolic::{self_convergence_error, Trajectory};
use mfinv::sampler::{default_step_size, run_ula, GaussianTarget, RunOptions};
use mfinv::spectral::PotentialVec;
use mfinv::stability::StabilityReport;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::config::{ExperimentConfig, PhiSpec};
use crate::{Failure, Suite};

#[derive(Clone, Debug, Serialize)]
pub struct Property {
    pub suite: Suite,
    pub name: String,
    pub measured: f64,
    /// Upper bound, or lower bound for convexity checks; `None` when only reported.
    pub tolerance: Option<f64>,
    pub passed: bool,
}

impl Property {
    fn upper(suite: Suite, name: &str, measured: f64, tolerance: f64) -> Self {
        Property { suite, name: name.into(), measured, tolerance: Some(tolerance), passed: measured <= tolerance }
    }

    fn lower(suite: Suite, name: &str, measured: f64, bound: f64) -> Self {
        Property { suite, name: name.into(), measured, tolerance: Some(bound), passed: measured >= bound }
    }

    fn info(suite: Suite, name: &str, measured: f64) -> Self {
        Property { suite, name: name.into(), measured, tolerance: None, passed: measured.is_finite() }
    }
}

pub fn run(cfg: &ExperimentConfig, suite: Suite) -> Result<Vec<Property>, Failure> {
    let mut out = Vec::new();
    let want = |s: Suite| suite == s || suite == Suite::All;
    if want(Suite::Gradients) {
        out.extend(gradients(cfg)?);
    }
    if want(Suite::Stability) {
        out.extend(stability(cfg)?);
    }
    if want(Suite::Surrogate) {
        out.extend(surrogate(cfg)?);
    }
    if want(Suite::Sampler) {
        out.extend(sampler(cfg)?);
    }
    Ok(out)
}

fn unit_direction(rng: &mut ChaCha8Rng, like: &PotentialVec) -> Result<PotentialVec, Failure> {
    let v: Vec<f64> = (0..like.len()).map(|_| rng.sample(StandardNormal)).collect();
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    Ok(like.with_values(v.iter().map(|x| x / n).collect())?)
}

/// `||a - b|| / ||b||`, absolute when `b` vanishes.
fn rel(a: &Trajectory, b: &Trajectory) -> Result<f64, Failure> {
    let diff = a.sub(b)?.norm_l2l2();
    let scale = b.norm_l2l2();
    Ok(if scale > 0.0 { diff / scale } else { diff })
}

fn central_difference(p: &McKVProblem, h: &PotentialVec, eps: f64) -> Result<Trajectory, Failure> {
    let plus = solve_mckv(&p.with_w(p.w.add_scaled(eps, h)?)?)?;
    let minus = solve_mckv(&p.with_w(p.w.add_scaled(-eps, h)?)?)?;
    Ok(plus.lincomb(0.5 / eps, &minus, -0.5 / eps)?)
}

pub fn self_convergence(p: &McKVProblem) -> Result<f64, Failure> {
    Ok(self_convergence_error(&p.stepper, |c| solve_mckv(&McKVProblem { stepper: *c, ..p.clone() }))?)
}

fn gradients(cfg: &ExperimentConfig) -> Result<Vec<Property>, Failure> {
    let s = Suite::Gradients;
    let p = cfg.problem()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let floor = self_convergence(&p)?;
    let rho = solve_mckv(&p)?;
    let tangent = McKVTangent::new(&p, &rho)?;
    let (mut fd_err, mut slope_dev, mut sym) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..3 {
        let h1 = unit_direction(&mut rng, &p.w)?;
        let h2 = unit_direction(&mut rng, &p.w)?;
        let d1 = tangent.first(&h1)?;
        let d2 = tangent.first(&h2)?;
        let e2 = rel(&central_difference(&p, &h1, 1e-2)?, &d1)?;
        let e3 = rel(&central_difference(&p, &h1, 1e-3)?, &d1)?;
        fd_err = fd_err.max(e3);
        // The slope is only meaningful above roundoff.
        if e3 > 1e-12 {
            slope_dev = slope_dev.max(((e2 / e3).log10() - 2.0).abs());
        }
        let s12 = tangent.second(&h1, &h2, &d1, &d2)?;
        let s21 = tangent.second(&h2, &h1, &d2, &d1)?;
        sym = sym.max(rel(&s21, &s12)?);
    }
    let mut props = vec![
        Property::upper(s, "first derivative vs central difference (eps=1e-3)", fd_err, 1e-4 + 10.0 * floor),
        Property::upper(s, "central difference order deviation from 2", slope_dev, 0.3),
        Property::upper(s, "second derivative symmetry", sym, 1e-10),
        Property::info(s, "solver self-convergence error", floor),
    ];
    let (max_rel, _) = likelihood_gradient_table(cfg, cfg.inference.n.min(50))?;
    props.push(Property::upper(s, "log-likelihood gradient vs central difference", max_rel, 1e-3));
    Ok(props)
}

/// Per-coordinate rows `(k, analytic, fd, rel_error)` at `W0` and the worst error.
pub fn likelihood_gradient_table(cfg: &ExperimentConfig, n: usize) -> Result<(f64, Vec<Vec<f64>>), Failure> {
    let p = cfg.problem()?;
    let (data, _) = generate_data(&p, n, cfg.inference.noise_std, cfg.seed, &cfg.phi_label())?;
    let model = LikelihoodModel::new(p.phi.clone(), p.t_end, p.stepper, cfg.problem.k_max, data)?;
    let w = &p.w;
    let g = model.grad_log_likelihood(w)?;
    let scale = g.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let eps = 1e-3;
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for k in 0..w.len() {
        let mut e = vec![0.0; w.len()];
        e[k] = eps;
        let dir = w.with_values(e)?;
        let fd = (model.log_likelihood(&w.add_scaled(1.0, &dir)?)?
            - model.log_likelihood(&w.add_scaled(-1.0, &dir)?)?)
            / (2.0 * eps);
        let gk = g.values()[k];
        let denom = gk.abs().max(1e-8 * scale);
        let err = if denom > 0.0 { (fd - gk).abs() / denom } else { (fd - gk).abs() };
        worst = worst.max(err);
        rows.push(vec![k as f64, gk, fd, err]);
    }
    Ok((worst, rows))
}

pub fn phi_zeta(cfg: &ExperimentConfig) -> f64 {
    match cfg.problem.phi {
        PhiSpec::Decay { zeta, .. } => zeta,
        PhiSpec::Uniform => 0.0,
    }
}

pub fn stability_report(cfg: &ExperimentConfig) -> Result<StabilityReport, Failure> {
    let p1 = cfg.problem()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
    let h = unit_direction(&mut rng, &p1.w)?;
    let p2 = p1.with_w(p1.w.add_scaled(0.1, &h)?)?;
    Ok(StabilityReport::compute(&p1, &p2, cfg.problem.k_max, phi_zeta(cfg), cfg.constants.beta)?)
}

fn stability(cfg: &ExperimentConfig) -> Result<Vec<Property>, Failure> {
    let s = Suite::Stability;
    let report = stability_report(cfg)?;
    let floor = self_convergence(&cfg.problem()?)?;
    Ok(vec![
        Property::info(s, "sigma_min of the linearised map", report.sigma_min),
        Property::info(s, "deconvolution margin", report.decon_margin),
        Property::info(s, "forward Lipschitz ratio", report.lipschitz_ratio),
        Property::upper(s, "pseudo-linearisation residual", report.pseudo_lin_residual, 5.0 * floor.max(1e-12)),
    ])
}

fn surrogate(cfg: &ExperimentConfig) -> Result<Vec<Property>, Failure> {
    let s = Suite::Surrogate;
    let p = cfg.problem()?;
    let n = cfg.inference.n.min(20);
    let (data, _) = generate_data(&p, n, cfg.inference.noise_std, cfg.seed, &cfg.phi_label())?;
    let model = LikelihoodModel::new(p.phi.clone(), p.t_end, p.stepper, cfg.problem.k_max, data)?;
    let r = cfg.surrogate.r_tilde;
    let lambda = lambda_min(n, r, 0.0, 0.0);
    let spec = SurrogateSpec::new(r, p.w.clone(), lambda)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(2));
    let mut mismatch = 0.0f64;
    for _ in 0..10 {
        let dir = unit_direction(&mut rng, &p.w)?;
        let w = spec.w_init.add_scaled(rng.gen_range(0.0..=0.5) * r, &dir)?;
        let (v, _) = surrogate_loglik(&model, &spec, &w)?;
        mismatch = mismatch.max((v - model.log_likelihood(&w)?).abs());
    }
    let h = 1e-3 * r;
    let min_second = (0..2000)
        .map(|i| {
            let t = 5.0 * r / 8.0 + i as f64 * 2.0 * r / 2000.0;
            lambda * (gamma_r(r, t + h) - 2.0 * gamma_r(r, t) + gamma_r(r, t - h))
        })
        .fold(f64::INFINITY, f64::min);
    let branch = (gamma_tilde(r, 5.0 * r / 8.0)).abs() + (gamma_tilde(r, 9.0 * r / 8.0) - r * r / 4.0).abs();
    Ok(vec![
        Property::upper(s, "surrogate equals log-likelihood on the r/2 ball", mismatch, 0.0),
        Property::lower(s, "min second difference of the tail penalty", min_second, -1e-10),
        Property::upper(s, "tail profile branch values", branch, 0.0),
    ])
}

fn sampler(cfg: &ExperimentConfig) -> Result<Vec<Property>, Failure> {
    let s = Suite::Sampler;
    let prior = PriorSpec::new(cfg.inference.alpha, cfg.problem.k_max, cfg.problem.d, cfg.inference.n);
    let variances = prior.variances();
    let gamma = default_step_size(&prior, 0.0);
    let (kept, burn) = (100_000, 20_000);
    let target = GaussianTarget { variances: variances.clone() };
    let options = RunOptions { gamma, n_steps: kept + burn, burn_in: burn, thin: 1, seed: cfg.seed };
    let run = run_ula(&target, &vec![0.0; prior.dim()], options)?;
    let d = &run.diagnostics;
    let worst = variances
        .iter()
        .enumerate()
        .map(|(j, s2)| (d.variance[j] - s2 / (1.0 - gamma / (2.0 * s2))).abs() / d.variance_se[j])
        .fold(0.0f64, f64::max);
    let tau = d.autocorrelation_time.iter().cloned().fold(0.0f64, f64::max);
    Ok(vec![
        Property::upper(s, "prior-target variance vs closed form (standard errors)", worst, 5.0),
        Property::info(s, "max integrated autocorrelation time", tau),
    ])
}

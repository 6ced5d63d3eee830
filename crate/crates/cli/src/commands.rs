//! Subcommand implementations. Each writes its artifacts and a manifest under `out`.

use std::f64::consts::PI;

use mfinv::forward_maps::{solve_mckv, solve_rd};
use mfinv::inference::{
    delta_n, estimate_c1, generate_data, lambda_min, surrogate_radius, validate_constants, AssumptionInputs,
    LikelihoodModel, Mode, PriorSpec, SurrogateSpec,
};
use mfinv::parabolic::{write_trajectory, Trajectory};
use mfinv::sampler::{
    default_step_size, run_ula, w2_diagnostics, ChainRun, GaussianTarget, RunOptions, SurrogatePosterior,
};
use mfinv::stability::{deconvolution_margin, gradient_stability_sigma_min};
use num_complex::Complex64;
use serde::Serialize;

use crate::config::{ExperimentConfig, Target, W0Spec};
use crate::output::Run;
use crate::suites::{self, Property};
use crate::{Failure, Suite};

const UNIFORM_NOTE: &str = "uniform steady state, non-identifiable: phi = 1 is stationary for every W";

fn common(run: &mut Run, cfg: &ExperimentConfig) {
    run.derive("D", cfg.dim());
    run.derive("delta_N", delta_n(cfg.inference.alpha, cfg.problem.d, cfg.inference.n));
    run.derive("steps", cfg.stepper().steps);
    run.derive("dt", cfg.problem.t_end / cfg.stepper().steps as f64);
    if cfg.is_uniform() {
        run.note(UNIFORM_NOTE);
    }
}

fn heat_deviation(rho: &Trajectory, cfg: &ExperimentConfig) -> Result<f64, Failure> {
    let phi = cfg.phi()?;
    let mut worst = 0.0f64;
    for m in 0..=rho.steps() {
        let t = rho.time(m);
        let exact = phi.apply_multiplier(|k| {
            let k2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
            Complex64::new((-4.0 * PI * PI * k2 * t).exp(), 0.0)
        });
        worst = worst.max((rho.node(m) - &exact).l2_norm() / exact.l2_norm());
    }
    Ok(worst)
}

fn series(rho: &Trajectory) -> Vec<Vec<f64>> {
    (0..=rho.steps()).map(|m| vec![rho.time(m), rho.node(m).mean(), rho.node(m).l2_norm()]).collect()
}

pub fn simulate(cfg: &ExperimentConfig) -> Result<(), Failure> {
    let mut run = Run::start(cfg, "simulate")?;
    common(&mut run, cfg);
    let p = cfg.problem()?;
    let rho = solve_mckv(&p)?;
    write_trajectory(&rho, &run.path("trajectory"))?;
    run.write_csv("series.csv", &["t", "mass", "l2_norm"], &series(&rho))?;
    run.derive("max_mass_deviation", rho.max_mass_deviation(1.0));
    run.derive("self_convergence_error", suites::self_convergence(&p)?);
    run.derive("uniform_steady_state", cfg.is_uniform());
    if matches!(cfg.problem.w0, W0Spec::Zero) || p.w.norm() == 0.0 {
        run.derive("heat_kernel_max_deviation", heat_deviation(&rho, cfg)?);
    }
    if let Some(r) = cfg.reaction() {
        let u = solve_rd(&r, &p.phi, p.t_end, &p.stepper)?;
        write_trajectory(&u, &run.path("reaction"))?;
        run.write_csv("reaction_series.csv", &["t", "mean", "l2_norm"], &series(&u))?;
    }
    let manifest = run.finish()?;
    println!("{}", manifest.display());
    Ok(())
}

#[derive(Serialize)]
struct VerifyReport {
    suite: Suite,
    passed: bool,
    properties: Vec<Property>,
}

pub fn verify(cfg: &ExperimentConfig, suite: Suite) -> Result<(), Failure> {
    let mut run = Run::start(cfg, "verify")?;
    common(&mut run, cfg);
    let properties = suites::run(cfg, suite)?;
    let failed: Vec<String> = properties.iter().filter(|p| !p.passed).map(|p| p.name.clone()).collect();
    for p in &properties {
        let tol = p.tolerance.map_or("reported".to_string(), |t| format!("tol {t:.1e}"));
        println!("{} {:?}: {} = {:.3e} ({tol})", if p.passed { "PASS" } else { "FAIL" }, p.suite, p.name, p.measured);
    }
    run.write_json("verify.json", &VerifyReport { suite, passed: failed.is_empty(), properties })?;
    run.derive("suite", suite);
    run.finish()?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verification(failed.join("; ")))
    }
}

pub fn gradcheck(cfg: &ExperimentConfig) -> Result<(), Failure> {
    let mut run = Run::start(cfg, "gradcheck")?;
    common(&mut run, cfg);
    let (worst, rows) = suites::likelihood_gradient_table(cfg, cfg.inference.n)?;
    run.write_csv("gradcheck.csv", &["coordinate", "analytic", "central_difference", "relative_error"], &rows)?;
    run.derive("max_relative_error", worst);
    run.derive("tolerance", 1e-3);
    run.finish()?;
    println!("max relative error {worst:.3e} over {} coordinates", rows.len());
    if worst <= 1e-3 {
        Ok(())
    } else {
        Err(Failure::Verification(format!("gradient error {worst:.3e} > 1e-3")))
    }
}

pub fn stability(cfg: &ExperimentConfig) -> Result<(), Failure> {
    let mut run = Run::start(cfg, "stability")?;
    common(&mut run, cfg);
    let report = suites::stability_report(cfg)?;
    run.write_json("stability.json", &report)?;
    let p = cfg.problem()?;
    let rho = solve_mckv(&p)?;
    let zeta = suites::phi_zeta(cfg);
    let mut rows = Vec::new();
    for k in 1..=cfg.problem.k_max {
        rows.push(vec![k as f64, gradient_stability_sigma_min(&p, k)?, deconvolution_margin(&rho, k, zeta)]);
    }
    run.write_csv("trend.csv", &["K", "sigma_min", "deconvolution_margin"], &rows)?;
    run.derive("sigma_min", report.sigma_min);
    run.finish()?;
    println!("sigma_min {:.3e}, pseudo-linearisation residual {:.3e}", report.sigma_min, report.pseudo_lin_residual);
    Ok(())
}

struct Posterior {
    model: LikelihoodModel,
    prior: PriorSpec,
    spec: SurrogateSpec,
    gamma: f64,
}

fn posterior(run: &mut Run, cfg: &ExperimentConfig) -> Result<Posterior, Failure> {
    let p = cfg.problem()?;
    let n = cfg.inference.n;
    let (data, _) = generate_data(&p, n, cfg.inference.noise_std, cfg.seed, &cfg.phi_label())?;
    data.write(&run.path("data.csv"))?;
    let model = LikelihoodModel::new(p.phi.clone(), p.t_end, p.stepper, cfg.problem.k_max, data)?;
    let prior = PriorSpec::new(cfg.inference.alpha, cfg.problem.k_max, cfg.problem.d, n);
    let w_init = cfg.w_init()?;
    let r = surrogate_radius(cfg.mode, cfg.surrogate.r_tilde, cfg.dim(), cfg.constants.w);
    if cfg.mode == Mode::Strict && r < 1e-6 {
        run.note(format!("strict-mode radius r = {r:.3e} is astronomically small; the chain will barely move"));
    }
    let c1 = match cfg.constants.c1 {
        Some(c) => c,
        None => estimate_c1(&p, std::slice::from_ref(&w_init))?,
    };
    let lambda = lambda_min(n, r, cfg.constants.c_hat, c1);
    let spec = SurrogateSpec::new(r, w_init, lambda)?;
    let gamma = cfg.sampler.gamma.unwrap_or_else(|| default_step_size(&prior, lambda));
    run.derive("r", r);
    run.derive("c1", c1);
    run.derive("c_hat", cfg.constants.c_hat);
    run.derive("lambda_min", lambda);
    run.derive("gamma", gamma);
    Ok(Posterior { model, prior, spec, gamma })
}

fn options(cfg: &ExperimentConfig, gamma: f64) -> RunOptions {
    let mut o = RunOptions::new(gamma, cfg.sampler.steps, cfg.seed);
    if let Some(b) = cfg.sampler.burn_in {
        o.burn_in = b.min(cfg.sampler.steps.saturating_sub(1));
    }
    o.thin = cfg.sampler.thin;
    o
}

fn write_chain(run: &Run, chain: &ChainRun) -> Result<(), Failure> {
    chain.write(&run.path("samples.csv"), &run.path("diagnostics.json"))?;
    Ok(())
}

pub fn sample(cfg: &ExperimentConfig) -> Result<(), Failure> {
    let mut run = Run::start(cfg, "sample")?;
    common(&mut run, cfg);
    let chain = match cfg.sampler.target {
        Target::Prior => {
            let prior = PriorSpec::new(cfg.inference.alpha, cfg.problem.k_max, cfg.problem.d, cfg.inference.n);
            let gamma = cfg.sampler.gamma.unwrap_or_else(|| default_step_size(&prior, 0.0));
            run.derive("gamma", gamma);
            let target = GaussianTarget { variances: prior.variances() };
            run_ula(&target, &vec![0.0; prior.dim()], options(cfg, gamma))?
        }
        Target::Posterior => {
            let post = posterior(&mut run, cfg)?;
            let target = SurrogatePosterior { model: &post.model, prior: &post.prior, spec: &post.spec };
            run_ula(&target, post.spec.w_init.values(), options(cfg, post.gamma))?
        }
    };
    write_chain(&run, &chain)?;
    run.finish()?;
    println!("{} samples kept", chain.kept);
    Ok(())
}

#[derive(Serialize)]
struct RecoveryReport {
    posterior_mean: Vec<f64>,
    truth: Vec<f64>,
    error_l2: f64,
    truth_norm: f64,
    w2_between_halves: f64,
    init_distance: f64,
    init_within_reach: bool,
    lambda_bound_satisfied: bool,
    identifiable: bool,
    constants: mfinv::inference::ConstantsReport,
}

pub fn recover(cfg: &ExperimentConfig) -> Result<(), Failure> {
    let mut run = Run::start(cfg, "recover")?;
    common(&mut run, cfg);
    let inputs = AssumptionInputs {
        n_data: Some(cfg.inference.n),
        k_max: Some(cfg.problem.k_max),
        forward_bias: Some(0.0),
        inverse_bias: Some(0.0),
        ..AssumptionInputs::default()
    };
    let constants = validate_constants(&cfg.constants(), &inputs);
    for f in constants.failures() {
        run.note(format!("assumption check failed: {} ({})", f.name, f.detail));
    }
    if cfg.mode == Mode::Strict && !constants.valid {
        return Err(Failure::Config("constants violate the strict-mode assumptions".into()));
    }
    let post = posterior(&mut run, cfg)?;
    let target = SurrogatePosterior { model: &post.model, prior: &post.prior, spec: &post.spec };
    let chain = run_ula(&target, post.spec.w_init.values(), options(cfg, post.gamma))?;
    write_chain(&run, &chain)?;

    let truth = cfg.w0()?;
    let mean = chain.diagnostics.mean.clone();
    let error_l2 = mean.iter().zip(truth.values()).map(|(m, w)| (m - w) * (m - w)).sum::<f64>().sqrt();
    let half = chain.samples.len() / 2;
    let w2 =
        if half > 0 { w2_diagnostics(&chain.samples[..half], &chain.samples[half..2 * half])?.sqrt() } else { 0.0 };
    let init_distance = post.spec.w_init.add_scaled(-1.0, &truth)?.norm();
    let report = RecoveryReport {
        posterior_mean: mean,
        truth: truth.values().to_vec(),
        error_l2,
        truth_norm: truth.norm(),
        w2_between_halves: w2,
        init_distance,
        init_within_reach: post.spec.init_within_reach(&truth)?,
        lambda_bound_satisfied: post.spec.satisfies_lambda_bound(cfg.inference.n, cfg.constants.c_hat, run_c1(&run)),
        identifiable: !cfg.is_uniform(),
        constants,
    };
    if !report.init_within_reach {
        run.note(format!("initialiser is {init_distance:.3e} from the truth, outside r/8"));
    }
    run.write_json("recovery.json", &report)?;
    run.derive("error_l2", error_l2);
    run.finish()?;
    println!("||posterior mean - W0|| = {error_l2:.4e} (||W0|| = {:.4e})", report.truth_norm);
    Ok(())
}

fn run_c1(run: &Run) -> f64 {
    run.derived.get("c1").and_then(|v| v.as_f64()).unwrap_or(0.0)
}

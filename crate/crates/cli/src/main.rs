//! `mfinv`: config-driven experiments for mean-field inverse problems.
//!
//! Exit codes: 0 success, 1 config error, 2 verification failure, 3 numerical abort.

// `!(x > 0.0)` style guards are kept on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;
mod suites;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use mfinv::inference::Mode;

use crate::config::ExperimentConfig;

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Verification(String),
    Numerical(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Verification(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "config error: {m}"),
            Failure::Verification(m) => write!(f, "verification failed: {m}"),
            Failure::Numerical(m) => write!(f, "numerical abort: {m}"),
        }
    }
}

impl From<mfinv::Error> for Failure {
    fn from(e: mfinv::Error) -> Self {
        use mfinv::Error::*;
        match e {
            BlowUp { .. } | NonFiniteDrift { .. } | RangeExcursion { .. } => Failure::Numerical(e.to_string()),
            other => Failure::Config(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Config(format!("i/o: {e}"))
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Config(format!("json: {e}"))
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "mfinv",
    version,
    about = "Forward maps, verification and Langevin sampling for mean-field inverse problems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides `seed` in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides `out` in the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides `mode` in the config.
    #[arg(long, global = true, value_enum)]
    mode: Option<ModeArg>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Strict,
    Experimental,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Gradients,
    Stability,
    Surrogate,
    Sampler,
    All,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the forward problem and write trajectories.
    Simulate,
    /// Run verification suites and write a pass/fail report.
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
    },
    /// Generate data, sample the surrogate posterior and report recovery.
    Recover,
    /// Finite-difference check of the log-likelihood gradient.
    Gradcheck,
    /// Stability diagnostics and lower-bound trends in K.
    Stability,
    /// Run the Langevin sampler on the configured target.
    Sample,
}

fn load(cli: &Cli) -> Result<ExperimentConfig, Failure> {
    let path = cli.config.as_ref().ok_or_else(|| Failure::Config("--config PATH is required".into()))?;
    let (mut cfg, _) = ExperimentConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    if let Some(mode) = cli.mode {
        cfg.mode = match mode {
            ModeArg::Strict => Mode::Strict,
            ModeArg::Experimental => Mode::Experimental,
        };
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let cfg = load(cli)?;
    match &cli.command {
        Command::Simulate => commands::simulate(&cfg),
        Command::Verify { suite } => commands::verify(&cfg, *suite),
        Command::Recover => commands::recover(&cfg),
        Command::Gradcheck => commands::gradcheck(&cfg),
        Command::Stability => commands::stability(&cfg),
        Command::Sample => commands::sample(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mfinv: {e}");
            ExitCode::from(e.code())
        }
    }
}

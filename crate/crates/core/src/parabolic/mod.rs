//! Integrating-factor time steppers for `d_t u = Lap u + F(t, u)` on the torus.
//!
//! The heat semigroup is applied exactly through the multiplier
//! `exp(-4 pi^2 |k|^2 dt)`; `F` is treated explicitly by Euler or Heun.
//! Heun's predictor states are kept on the trajectory so that linear solves
//! driven by a trajectory reproduce the exact tangent of the discrete
//! nonlinear step.

mod linear;
mod trajectory;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::SpectralField;
pub use linear::{solve_linear_lw, LinearizedOperator};
pub use trajectory::{read_trajectory, write_trajectory, Stage, Trajectory, TrajectoryManifest};

/// Coefficient magnitude treated as divergence.
pub const BLOW_UP_THRESHOLD: f64 = 1e12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// First order: `u+ = E (u + dt F(u))`.
    IfEuler,
    /// Second order: predictor `u* = E (u + dt F(u))`,
    /// corrector `u+ = E (u + dt/2 F(u)) + dt/2 F(u*)`.
    IfHeun,
}

impl Scheme {
    pub fn order(self) -> u32 {
        match self {
            Scheme::IfEuler => 1,
            Scheme::IfHeun => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepperConfig {
    /// Number of time steps `M` over `[0, T]`.
    pub steps: usize,
    pub scheme: Scheme,
    /// Dealiasing factor used when building the problem grid.
    pub pad: f64,
    /// Diagnostic tolerance reported alongside runs.
    pub tol_report: f64,
}

impl Default for StepperConfig {
    fn default() -> Self {
        StepperConfig { steps: 256, scheme: Scheme::IfHeun, pad: 1.5, tol_report: 1e-8 }
    }
}

impl StepperConfig {
    /// Default resolution for horizon `t_end`: 512 steps per unit time, at least 64.
    pub fn for_horizon(t_end: f64) -> Self {
        let steps = ((512.0 * t_end).ceil() as usize).max(64);
        StepperConfig { steps, ..Self::default() }
    }

    pub fn with_steps(self, steps: usize) -> Self {
        StepperConfig { steps, ..self }
    }

    pub fn with_scheme(self, scheme: Scheme) -> Self {
        StepperConfig { scheme, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::InvalidArgument("stepper needs at least one step".into()));
        }
        if !(self.pad >= 1.0) {
            return Err(Error::InvalidArgument(format!("dealias factor {} < 1", self.pad)));
        }
        Ok(())
    }
}

/// `exp(-4 pi^2 |k|^2 dt)` for every stored coefficient.
pub(crate) fn heat_multipliers(field: &SpectralField, dt: f64) -> Vec<f64> {
    let grid = field.grid();
    (0..grid.len())
        .map(|flat| match grid.wavevector(flat) {
            Some(k) => (-4.0 * PI * PI * dt * (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64).exp(),
            None => 0.0,
        })
        .collect()
}

fn apply_semigroup(field: &mut SpectralField, multipliers: &[f64]) {
    field.map_coeffs(|i, c| c * multipliers[i]);
}

fn check_blow_up(field: &SpectralField, step: usize) -> Result<()> {
    let magnitude = field.max_abs_coeff();
    if !field.is_finite() || !(magnitude <= BLOW_UP_THRESHOLD) {
        return Err(Error::BlowUp { step, magnitude });
    }
    Ok(())
}

/// Integrates `d_t u = Lap u + F` from `u0` over `[0, t_end]`.
///
/// `rhs(stage, t, u)` returns `F(t, u)`; `stage` tells stage-aware callers
/// which stored coefficients to use.
pub fn integrate<F>(u0: &SpectralField, t_end: f64, config: &StepperConfig, mut rhs: F) -> Result<Trajectory>
where
    F: FnMut(Stage, f64, &SpectralField) -> Result<SpectralField>,
{
    config.validate()?;
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(Error::InvalidArgument(format!("horizon T = {t_end} must be positive")));
    }
    check_blow_up(u0, 0)?;
    let m = config.steps;
    let dt = t_end / m as f64;
    let semigroup = heat_multipliers(u0, dt);
    let mut nodes = Vec::with_capacity(m + 1);
    let mut stages = Vec::with_capacity(if config.scheme == Scheme::IfHeun { m } else { 0 });
    nodes.push(u0.clone());
    for n in 0..m {
        let t = n as f64 * dt;
        let u = &nodes[n];
        let f = rhs(Stage::Node(n), t, u)?;
        let next = match config.scheme {
            Scheme::IfEuler => {
                let mut next = u.clone();
                next.axpy(dt, &f)?;
                apply_semigroup(&mut next, &semigroup);
                next
            }
            Scheme::IfHeun => {
                let mut predictor = u.clone();
                predictor.axpy(dt, &f)?;
                apply_semigroup(&mut predictor, &semigroup);
                check_blow_up(&predictor, n + 1)?;
                let f_pred = rhs(Stage::Predictor(n), t + dt, &predictor)?;
                let mut next = u.clone();
                next.axpy(0.5 * dt, &f)?;
                apply_semigroup(&mut next, &semigroup);
                next.axpy(0.5 * dt, &f_pred)?;
                stages.push(predictor);
                next
            }
        };
        check_blow_up(&next, n + 1)?;
        nodes.push(next);
    }
    Ok(Trajectory::from_parts(t_end, config.scheme, nodes, stages))
}

/// Relative `L^2L^2` distance between solutions at `M` and `2M` steps,
/// compared on the coarse nodes.
pub fn self_convergence_error(
    config: &StepperConfig,
    mut solve: impl FnMut(&StepperConfig) -> Result<Trajectory>,
) -> Result<f64> {
    let coarse = solve(config)?;
    let fine = solve(&config.with_steps(2 * config.steps))?.subsample(2)?;
    let diff = coarse.sub(&fine)?.norm_l2l2();
    let scale = fine.norm_l2l2();
    Ok(if scale > 0.0 { diff / scale } else { diff })
}

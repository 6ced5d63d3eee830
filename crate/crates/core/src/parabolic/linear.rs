//! The linearised McKean–Vlasov operator
//! `L_W v = Lap v + div(v grad W * rho) + div(rho grad W * v)`
//! with time-dependent coefficients read from a stored `rho` trajectory.

use super::{integrate, Stage, StepperConfig, Trajectory};
use crate::error::{Error, Result};
use crate::spectral::{Grid, PotentialVec, SpectralField};

/// First-order part of `L_W` with per-stage coefficients held on the padded grid.
pub struct LinearizedOperator {
    grid: Grid,
    grad_w: Vec<SpectralField>,
    rho_phys: Vec<Vec<f64>>,
    // [slot][axis]: grad W * rho
    drift_phys: Vec<Vec<Vec<f64>>>,
    layout: Trajectory,
}

impl LinearizedOperator {
    /// Precomputes coefficients for every node and stored stage of `rho`.
    pub fn new(w: &SpectralField, rho: &Trajectory) -> Result<Self> {
        let grid = *rho.grid();
        if *w.grid() != grid {
            return Err(Error::GridMismatch(format!("W on {:?}, rho on {:?}", w.grid(), grid)));
        }
        let grad_w = w.gradient();
        let mut rho_phys = vec![Vec::new(); rho.stage_count()];
        let mut drift_phys = vec![Vec::new(); rho.stage_count()];
        let mut fill = |stage: Stage| -> Result<()> {
            let slot = rho.stage_slot(stage);
            if !rho_phys[slot].is_empty() {
                return Ok(());
            }
            let r = rho.at_stage(stage);
            rho_phys[slot] = r.to_padded_physical();
            drift_phys[slot] = grad_w.iter().map(|g| Ok(g.convolve(r)?.to_padded_physical())).collect::<Result<_>>()?;
            Ok(())
        };
        for n in 0..=rho.steps() {
            fill(Stage::Node(n))?;
        }
        for n in 0..rho.steps() {
            fill(Stage::Predictor(n))?;
        }
        Ok(LinearizedOperator { grid, grad_w, rho_phys, drift_phys, layout: Trajectory::zeros_like(rho) })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// `div(v grad W * rho) + div(rho grad W * v)` at `stage`.
    pub fn apply_transport(&self, stage: Stage, v: &SpectralField) -> Result<SpectralField> {
        let slot = self.layout.stage_slot(stage);
        let v_phys = v.to_padded_physical();
        let rho = &self.rho_phys[slot];
        let mut out = SpectralField::zeros(self.grid);
        for (axis, g) in self.grad_w.iter().enumerate() {
            let b = g.convolve(v)?.to_padded_physical();
            let a = &self.drift_phys[slot][axis];
            let flux: Vec<f64> = (0..b.len()).map(|i| v_phys[i] * a[i] + rho[i] * b[i]).collect();
            out.axpy(1.0, &SpectralField::from_padded_physical(self.grid, &flux).partial(axis))?;
        }
        Ok(out)
    }

    /// Solves `(d_t - L_W) u = f`, `u(0) = u0`, with `f` supplied per stage.
    pub fn solve_with(
        &self,
        u0: &SpectralField,
        config: &StepperConfig,
        mut forcing: impl FnMut(Stage) -> Result<SpectralField>,
    ) -> Result<Trajectory> {
        if config.steps != self.layout.steps() {
            return Err(Error::GridMismatch(format!(
                "stepper has M = {}, coefficients have M = {}",
                config.steps,
                self.layout.steps()
            )));
        }
        if *u0.grid() != self.grid {
            return Err(Error::GridMismatch(format!("u0 on {:?}, operator on {:?}", u0.grid(), self.grid)));
        }
        integrate(u0, self.layout.t_end(), config, |stage, _, v| {
            let mut g = self.apply_transport(stage, v)?;
            g.axpy(1.0, &forcing(stage)?)?;
            Ok(g)
        })
    }

    /// Solves with a forcing trajectory on the same time grid.
    pub fn solve(&self, forcing: &Trajectory, u0: &SpectralField, config: &StepperConfig) -> Result<Trajectory> {
        forcing.check_layout(&self.layout)?;
        self.solve_with(u0, config, |stage| Ok(forcing.at_stage(stage).clone()))
    }
}

/// Solves `(d_t - L_W) u = forcing`, `u(0) = u0`.
pub fn solve_linear_lw(
    w: &PotentialVec,
    rho: &Trajectory,
    forcing: &Trajectory,
    u0: &SpectralField,
    config: &StepperConfig,
) -> Result<Trajectory> {
    rho.check_layout(forcing)?;
    let op = LinearizedOperator::new(&w.to_field(*rho.grid())?, rho)?;
    op.solve(forcing, u0, config)
}

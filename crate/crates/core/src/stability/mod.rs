//! Stability diagnostics: pseudo-linearisation, deconvolution margins,
//! the smallest singular value of the linearised map, forward Lipschitz ratios.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward_maps::{jacobian_matrix, solve_mckv, trilinear_t, McKVProblem};
use crate::parabolic::{LinearizedOperator, Trajectory};
use crate::spectral::{ek_modes, PotentialVec, SpectralField};

/// Solution of the pseudo-linearised equation and its distance to the direct difference.
#[derive(Clone, Debug)]
pub struct PseudoLinearisation {
    pub v: Trajectory,
    pub direct: Trajectory,
    /// `||v - direct|| / ||direct||` in `L^2L^2`; absolute when `direct` vanishes.
    pub residual: f64,
}

fn check_shared(p1: &McKVProblem, p2: &McKVProblem) -> Result<()> {
    if p1.grid() != p2.grid()
        || p1.stepper != p2.stepper
        || p1.t_end != p2.t_end
        || (&p1.phi - &p2.phi).max_abs_coeff() != 0.0
    {
        return Err(Error::InvalidArgument("problems must share phi, grid, T and stepper".into()));
    }
    Ok(())
}

fn difference_potential(p1: &McKVProblem, p2: &McKVProblem) -> Result<PotentialVec> {
    let k = p1.w.k_max().max(p2.w.k_max());
    p2.w.embed(k).add_scaled(-1.0, &p1.w.embed(k))
}

/// Solves `(d_t - L) v = T(rho_1, W_2 - W_1, rho_1)`, `v(0) = 0`, where `L` is
/// the linearised operator of `W_2` with coefficient `(rho_1 + rho_2) / 2`.
pub fn pseudo_linearised_difference(p1: &McKVProblem, p2: &McKVProblem) -> Result<PseudoLinearisation> {
    check_shared(p1, p2)?;
    let rho1 = solve_mckv(p1)?;
    let rho2 = solve_mckv(p2)?;
    let mean = Trajectory::map_stages(&rho1, |s| Ok(&(rho1.at_stage(s) + rho2.at_stage(s)) * 0.5))?;
    let dw = difference_potential(p1, p2)?.to_field(*p1.grid())?;
    let op = LinearizedOperator::new(&p2.w_field(), &mean)?;
    let zero = SpectralField::zeros(*p1.grid());
    let v = op.solve_with(&zero, &p1.stepper, |s| {
        let r = rho1.at_stage(s);
        trilinear_t(r, &dw, r)
    })?;
    let direct = rho2.sub(&rho1)?;
    let diff = v.sub(&direct)?.norm_l2l2();
    let scale = direct.norm_l2l2();
    let residual = if scale > 0.0 { diff / scale } else { diff };
    Ok(PseudoLinearisation { v, direct, residual })
}

/// Quantities entering the deconvolution window `[0, t0]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeconvolutionWindow {
    /// `min_{0<|k|<=K} |phi_k| |k|^zeta` of the initial state.
    pub c_star: f64,
    /// `max_n ||rho_{n+1} - rho_n||_{L^1} / dt`.
    pub c_hat: f64,
    pub t0: f64,
}

fn l1_norm(f: &SpectralField) -> f64 {
    let values = f.to_physical();
    values.iter().map(|v| v.abs()).sum::<f64>() / values.len() as f64
}

fn weighted_min(f: &SpectralField, k_max: usize, zeta: f64) -> f64 {
    ek_modes(k_max, f.grid().dim())
        .iter()
        .map(|k| f.coeff(k).norm() * k.norm().powf(zeta))
        .fold(f64::INFINITY, f64::min)
}

/// `t0 = min(T, c_* K^-zeta / (2 C))`, with `t0 = T` when `C = 0`.
pub fn deconvolution_window(rho: &Trajectory, k_max: usize, zeta: f64) -> DeconvolutionWindow {
    let c_star = weighted_min(rho.node(0), k_max, zeta);
    let c_hat = (0..rho.steps()).map(|n| l1_norm(&(rho.node(n + 1) - rho.node(n))) / rho.dt()).fold(0.0, f64::max);
    let t0 =
        if c_hat > 0.0 { rho.t_end().min(c_star * (k_max as f64).powf(-zeta) / (2.0 * c_hat)) } else { rho.t_end() };
    DeconvolutionWindow { c_star, c_hat, t0 }
}

/// `min |rho(t_n, k)| |k|^zeta` over `0 < |k| <= K` and stored `t_n <= t0`.
pub fn deconvolution_margin_on(rho: &Trajectory, k_max: usize, zeta: f64, t0: f64) -> f64 {
    let tol = 1e-12 * rho.t_end();
    (0..=rho.steps())
        .take_while(|&n| rho.time(n) <= t0 + tol)
        .map(|n| weighted_min(rho.node(n), k_max, zeta))
        .fold(f64::INFINITY, f64::min)
}

pub fn deconvolution_margin(rho: &Trajectory, k_max: usize, zeta: f64) -> f64 {
    let window = deconvolution_window(rho, k_max, zeta);
    deconvolution_margin_on(rho, k_max, zeta, window.t0)
}

/// Smallest singular value of `H -> D rho_W [H]` from `(E_K, L^2)` to `L^2([0,T]; L^2)`.
pub fn gradient_stability_sigma_min(problem: &McKVProblem, k_max: usize) -> Result<f64> {
    let rho = solve_mckv(problem)?;
    sigma_min_from(problem, &rho, k_max)
}

pub(crate) fn sigma_min_from(problem: &McKVProblem, rho: &Trajectory, k_max: usize) -> Result<f64> {
    let gram = jacobian_matrix(problem, rho, k_max)?.l2l2_gram();
    Ok(gram.symmetric_eigenvalues().min().max(0.0).sqrt())
}

/// `||rho_2 - rho_1||_{L^2L^2} / ||W_2 - W_1||_{H^-(beta+1)}`.
pub fn forward_lipschitz_probe(p1: &McKVProblem, p2: &McKVProblem, beta: f64) -> Result<f64> {
    check_shared(p1, p2)?;
    let dw = difference_potential(p1, p2)?;
    let denom = dw.sobolev_norm(-(beta + 1.0));
    if denom == 0.0 {
        return Err(Error::InvalidArgument("W1 = W2: Lipschitz ratio undefined".into()));
    }
    let num = solve_mckv(p2)?.sub(&solve_mckv(p1)?)?.norm_l2l2();
    Ok(num / denom)
}

/// One-record summary of the stability diagnostics for a pair of potentials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub sigma_min: f64,
    pub decon_margin: f64,
    pub lipschitz_ratio: f64,
    pub pseudo_lin_residual: f64,
    pub window: DeconvolutionWindow,
    pub k: usize,
    pub zeta: f64,
    pub beta: f64,
}

impl StabilityReport {
    /// Runs every diagnostic; `sigma_min` and the margin refer to `p1`.
    pub fn compute(p1: &McKVProblem, p2: &McKVProblem, k_max: usize, zeta: f64, beta: f64) -> Result<Self> {
        let rho1 = solve_mckv(p1)?;
        let window = deconvolution_window(&rho1, k_max, zeta);
        let report = StabilityReport {
            sigma_min: sigma_min_from(p1, &rho1, k_max)?,
            decon_margin: deconvolution_margin_on(&rho1, k_max, zeta, window.t0),
            lipschitz_ratio: forward_lipschitz_probe(p1, p2, beta)?,
            pseudo_lin_residual: pseudo_linearised_difference(p1, p2)?.residual,
            window,
            k: k_max,
            zeta,
            beta,
        };
        Ok(report)
    }

    pub fn is_valid(&self) -> bool {
        [self.sigma_min, self.decon_margin, self.lipschitz_ratio, self.pseudo_lin_residual]
            .iter()
            .all(|v| v.is_finite() && *v >= 0.0)
    }
}

use nalgebra::DMatrix;

use super::data::{Dataset, Design};
use super::prior::PriorSpec;
use crate::error::{Error, Result};
use crate::forward_maps::{jacobian_matrix, solve_mckv, Jacobian, McKVProblem, McKVTangent};
use crate::parabolic::{StepperConfig, Trajectory};
use crate::spectral::{PotentialVec, SpectralField};

/// Gaussian regression likelihood for `W` in `E_K` with the data design tabulated.
#[derive(Clone, Debug)]
pub struct LikelihoodModel {
    base: McKVProblem,
    data: Dataset,
    design: Design,
}

/// Forward solve, residuals and optionally the Jacobian at one `W`.
#[derive(Clone, Debug)]
pub struct LikelihoodEval {
    pub value: f64,
    pub residuals: Vec<f64>,
    pub rho: Trajectory,
}

impl LikelihoodModel {
    pub fn new(phi: SpectralField, t_end: f64, stepper: StepperConfig, k_max: usize, data: Dataset) -> Result<Self> {
        let d = phi.grid().dim();
        let base = McKVProblem::new(PotentialVec::zeros(k_max, d), phi, t_end, stepper)?;
        if data.meta.d != d || (data.meta.t_end - t_end).abs() > 1e-12 * t_end {
            return Err(Error::InvalidArgument("dataset does not match the problem's d or T".into()));
        }
        let layout = Trajectory::zeros_like(&solve_mckv(&base.with_w(PotentialVec::zeros(k_max, d))?)?);
        let design = Design::new(&data, &layout)?;
        Ok(LikelihoodModel { base, data, design })
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn design(&self) -> &Design {
        &self.design
    }

    pub fn k_max(&self) -> usize {
        self.base.w.k_max()
    }

    pub fn dim(&self) -> usize {
        self.base.w.len()
    }

    pub fn problem(&self, w: &PotentialVec) -> Result<McKVProblem> {
        if w.k_max() != self.k_max() || w.dim() != self.base.w.dim() {
            return Err(Error::InvalidArgument(format!(
                "W lives in E_{} (d = {}), model expects E_{} (d = {})",
                w.k_max(),
                w.dim(),
                self.k_max(),
                self.base.w.dim()
            )));
        }
        self.base.with_w(w.clone())
    }

    pub fn evaluate(&self, w: &PotentialVec) -> Result<LikelihoodEval> {
        let rho = solve_mckv(&self.problem(w)?)?;
        let residuals: Vec<f64> = (0..self.data.len()).map(|i| self.data.y[i] - self.design.eval(&rho, i)).collect();
        let value = -0.5 * residuals.iter().map(|r| r * r).sum::<f64>();
        Ok(LikelihoodEval { value, residuals, rho })
    }

    /// `l_N(W) = -1/2 sum_i |Y_i - rho_W(t_i, X_i)|^2`.
    pub fn log_likelihood(&self, w: &PotentialVec) -> Result<f64> {
        Ok(self.evaluate(w)?.value)
    }

    /// `[D rho_W [tau_k](t_i, X_i)]_{i,k}`.
    pub fn gradient_matrix(&self, jac: &Jacobian) -> DMatrix<f64> {
        DMatrix::from_fn(self.data.len(), jac.len(), |i, k| self.design.eval(&jac.columns[k], i))
    }

    /// `sum_i r_i [D rho_W [tau_k](t_i, X_i)]_k`.
    pub fn gradient_from_residuals(&self, residuals: &[f64], jac: &Jacobian) -> PotentialVec {
        let values = jac
            .columns
            .iter()
            .map(|col| residuals.iter().enumerate().map(|(i, r)| r * self.design.eval(col, i)).sum())
            .collect();
        PotentialVec::new(jac.k_max, self.base.w.dim(), values).expect("jacobian spans E_K")
    }

    pub fn log_likelihood_and_gradient(&self, w: &PotentialVec) -> Result<(f64, PotentialVec)> {
        let eval = self.evaluate(w)?;
        let jac = jacobian_matrix(&self.problem(w)?, &eval.rho, self.k_max())?;
        Ok((eval.value, self.gradient_from_residuals(&eval.residuals, &jac)))
    }

    pub fn grad_log_likelihood(&self, w: &PotentialVec) -> Result<PotentialVec> {
        Ok(self.log_likelihood_and_gradient(w)?.1)
    }

    /// Exact `-grad^2 l` of the single datum `i` at `W`, from first and second
    /// derivative trajectories.
    pub fn datum_neg_hessian(
        &self,
        i: usize,
        residual: f64,
        jac: &Jacobian,
        second: &[Vec<Trajectory>],
    ) -> DMatrix<f64> {
        let g: Vec<f64> = jac.columns.iter().map(|c| self.design.eval(c, i)).collect();
        let n = g.len();
        DMatrix::from_fn(n, n, |j, k| {
            let (a, b) = if j <= k { (j, k) } else { (k, j) };
            g[j] * g[k] - residual * self.design.eval(&second[a][b - a], i)
        })
    }

    /// `H(W) = -l_N(W) + 1/2 W^T Sigma^{-1} W`.
    pub fn posterior_energy(&self, w: &PotentialVec, prior: &PriorSpec) -> Result<f64> {
        Ok(-self.log_likelihood(w)? + 0.5 * prior.quadratic_form(w.values()))
    }

    /// Gradient of the posterior energy: `-grad l_N + Sigma^{-1} W`.
    pub fn posterior_energy_gradient(&self, w: &PotentialVec, prior: &PriorSpec) -> Result<PotentialVec> {
        let g = self.grad_log_likelihood(w)?;
        let values = g.values().iter().zip(w.values()).zip(prior.precision()).map(|((g, w), p)| -g + p * w).collect();
        w.with_values(values)
    }
}

/// Upper triangle of `D^2 rho_W [tau_j, tau_k]`, `j <= k`: `out[j][k - j]`.
pub fn second_derivative_table(
    problem: &McKVProblem,
    rho: &Trajectory,
    jac: &Jacobian,
) -> Result<Vec<Vec<Trajectory>>> {
    let tangent = McKVTangent::new(problem, rho)?;
    let d = problem.w.dim();
    let units: Vec<PotentialVec> =
        jac.modes.iter().map(|k| PotentialVec::unit(jac.k_max, d, k)).collect::<Result<_>>()?;
    (0..units.len())
        .map(|j| {
            (j..units.len()).map(|k| tangent.second(&units[j], &units[k], &jac.columns[j], &jac.columns[k])).collect()
        })
        .collect()
}

/// `E_{W_0}[-grad^2 l(W)]` for a single datum with `(t, X)` uniform on `[0,T] x T^d`:
/// `(1/T) <D rho[tau_j], D rho[tau_k]> + (1/T) <rho_W - rho_{W_0}, D^2 rho[tau_j, tau_k]>`.
pub fn expected_neg_hessian(w: &McKVProblem, w0: &PotentialVec) -> Result<DMatrix<f64>> {
    let rho = solve_mckv(w)?;
    let rho0 = solve_mckv(&w.with_w(w0.clone())?)?;
    let jac = jacobian_matrix(w, &rho, w.w.k_max())?;
    let mut h = jac.gram();
    let diff = rho.sub(&rho0)?;
    if diff.norm_l2l2() > 0.0 {
        let second = second_derivative_table(w, &rho, &jac)?;
        let t = rho.t_end();
        for j in 0..jac.len() {
            for k in j..jac.len() {
                let c = diff.inner_l2l2(&second[j][k - j])? / t;
                h[(j, k)] += c;
                if k != j {
                    h[(k, j)] += c;
                }
            }
        }
    }
    Ok(h)
}

/// Local regularity probe: the largest of `sup |G|`, `sup ||grad G||` and
/// `sup ||grad^2 G||` over the grid nodes, for each probe potential.
pub fn estimate_c1(base: &McKVProblem, probes: &[PotentialVec]) -> Result<f64> {
    let mut c1 = 0.0f64;
    for w in probes {
        let p = base.with_w(w.clone())?;
        let rho = solve_mckv(&p)?;
        let jac = jacobian_matrix(&p, &rho, w.k_max())?;
        let second = second_derivative_table(&p, &rho, &jac)?;
        let n = jac.len();
        for m in 0..=rho.steps() {
            let rho_m = rho.node(m).to_physical();
            let cols: Vec<Vec<f64>> = jac.columns.iter().map(|c| c.node(m).to_physical()).collect();
            let sec: Vec<Vec<Vec<f64>>> =
                second.iter().map(|row| row.iter().map(|s| s.node(m).to_physical()).collect()).collect();
            for x in 0..rho_m.len() {
                let grad_sq: f64 = cols.iter().map(|c| c[x] * c[x]).sum();
                let hess = DMatrix::from_fn(n, n, |j, k| {
                    let (a, b) = if j <= k { (j, k) } else { (k, j) };
                    sec[a][b - a][x]
                });
                let spec = hess.symmetric_eigenvalues().amax();
                c1 = c1.max(rho_m[x].abs()).max(grad_sq.sqrt()).max(spec);
            }
        }
    }
    Ok(c1)
}

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::parabolic::{integrate, LinearizedOperator, Stage, StepperConfig, Trajectory};
use crate::spectral::{ek_modes, Grid, ModeIndex, PotentialVec, SpectralField};

/// `div(r grad V * s)`.
pub fn trilinear_t(r: &SpectralField, v: &SpectralField, s: &SpectralField) -> Result<SpectralField> {
    let grid = *r.grid();
    let mut out = SpectralField::zeros(grid);
    for (axis, g) in v.gradient().iter().enumerate() {
        out.axpy(1.0, &r.product(&g.convolve(s)?)?.partial(axis))?;
    }
    Ok(out)
}

/// Interaction potential, initial density and time discretisation.
#[derive(Clone, Debug)]
pub struct McKVProblem {
    pub w: PotentialVec,
    pub phi: SpectralField,
    pub t_end: f64,
    pub stepper: StepperConfig,
}

impl McKVProblem {
    /// Checks that `phi` is a real density of mass one and that `W` fits the grid.
    pub fn new(w: PotentialVec, phi: SpectralField, t_end: f64, stepper: StepperConfig) -> Result<Self> {
        if (phi.mean() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("initial mass {} is not 1", phi.mean())));
        }
        if phi.conjugate_symmetry_defect() > 1e-12 {
            return Err(Error::InvalidArgument("initial condition is not real".into()));
        }
        if !(t_end > 0.0) {
            return Err(Error::InvalidArgument(format!("horizon T = {t_end} must be positive")));
        }
        stepper.validate()?;
        w.to_field(*phi.grid())?;
        Ok(McKVProblem { w, phi, t_end, stepper })
    }

    pub fn grid(&self) -> &Grid {
        self.phi.grid()
    }

    pub fn w_field(&self) -> SpectralField {
        self.w.to_field(*self.grid()).expect("validated at construction")
    }

    /// Same problem with another potential.
    pub fn with_w(&self, w: PotentialVec) -> Result<Self> {
        McKVProblem::new(w, self.phi.clone(), self.t_end, self.stepper)
    }
}

/// Solves `d_t rho = Lap rho + T(rho, W, rho)` for a potential given as a field
/// (its mean is irrelevant).
pub fn solve_mckv_field(
    w: &SpectralField,
    phi: &SpectralField,
    t_end: f64,
    config: &StepperConfig,
) -> Result<Trajectory> {
    let grad_w = w.gradient();
    integrate(phi, t_end, config, |_, _, rho| {
        let rho_phys = rho.to_padded_physical();
        let mut out = SpectralField::zeros(*rho.grid());
        for (axis, g) in grad_w.iter().enumerate() {
            let b = g.convolve(rho)?.to_padded_physical();
            let flux: Vec<f64> = rho_phys.iter().zip(&b).map(|(r, b)| r * b).collect();
            out.axpy(1.0, &SpectralField::from_padded_physical(*rho.grid(), &flux).partial(axis))?;
        }
        Ok(out)
    })
}

pub fn solve_mckv(problem: &McKVProblem) -> Result<Trajectory> {
    solve_mckv_field(&problem.w_field(), &problem.phi, problem.t_end, &problem.stepper)
}

/// `L_W` assembled once around a base trajectory; reused for every direction.
pub struct McKVTangent<'a> {
    problem: &'a McKVProblem,
    rho: &'a Trajectory,
    op: LinearizedOperator,
}

impl<'a> McKVTangent<'a> {
    pub fn new(problem: &'a McKVProblem, rho: &'a Trajectory) -> Result<Self> {
        if rho.steps() != problem.stepper.steps || (rho.t_end() - problem.t_end).abs() > 1e-14 * problem.t_end {
            return Err(Error::GridMismatch("base trajectory does not match the problem's time grid".into()));
        }
        let op = LinearizedOperator::new(&problem.w_field(), rho)?;
        Ok(McKVTangent { problem, rho, op })
    }

    pub fn rho(&self) -> &Trajectory {
        self.rho
    }

    /// `D rho_W [H]`.
    pub fn first(&self, h: &PotentialVec) -> Result<Trajectory> {
        self.first_field(&h.to_field(*self.problem.grid())?)
    }

    pub fn first_field(&self, h: &SpectralField) -> Result<Trajectory> {
        let rho = self.rho;
        self.solve(|stage| {
            let r = rho.at_stage(stage);
            trilinear_t(r, h, r)
        })
    }

    /// `D^2 rho_W [H1, H2]` from cached first derivatives `d1`, `d2`.
    pub fn second(&self, h1: &PotentialVec, h2: &PotentialVec, d1: &Trajectory, d2: &Trajectory) -> Result<Trajectory> {
        d1.check_layout(self.rho)?;
        d2.check_layout(self.rho)?;
        let grid = *self.problem.grid();
        let (f1, f2) = (h1.to_field(grid)?, h2.to_field(grid)?);
        let w = self.problem.w_field();
        let rho = self.rho;
        self.solve(|stage| {
            let (r, a, b) = (rho.at_stage(stage), d1.at_stage(stage), d2.at_stage(stage));
            let mut g = trilinear_t(b, &f1, r)?;
            g.axpy(1.0, &trilinear_t(r, &f1, b)?)?;
            g.axpy(1.0, &trilinear_t(a, &f2, r)?)?;
            g.axpy(1.0, &trilinear_t(r, &f2, a)?)?;
            g.axpy(1.0, &trilinear_t(a, &w, b)?)?;
            g.axpy(1.0, &trilinear_t(b, &w, a)?)?;
            Ok(g)
        })
    }

    /// Solves `(d_t - L_W) v = f`, `v(0) = 0`.
    pub fn solve(&self, forcing: impl FnMut(Stage) -> Result<SpectralField>) -> Result<Trajectory> {
        let zero = SpectralField::zeros(*self.problem.grid());
        self.op.solve_with(&zero, &self.problem.stepper, forcing)
    }
}

pub fn mckv_first_derivative(problem: &McKVProblem, h: &PotentialVec, rho: &Trajectory) -> Result<Trajectory> {
    McKVTangent::new(problem, rho)?.first(h)
}

pub fn mckv_second_derivative(
    problem: &McKVProblem,
    h1: &PotentialVec,
    h2: &PotentialVec,
    rho: &Trajectory,
    d1: &Trajectory,
    d2: &Trajectory,
) -> Result<Trajectory> {
    McKVTangent::new(problem, rho)?.second(h1, h2, d1, d2)
}

/// Columns `D rho_W [tau_k]` over the basis of `E_K`.
#[derive(Clone, Debug)]
pub struct Jacobian {
    pub k_max: usize,
    pub modes: Vec<ModeIndex>,
    pub columns: Vec<Trajectory>,
}

impl Jacobian {
    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    /// `<col_j, col_k>` in `L^2([0,T]; L^2)`.
    pub fn l2l2_gram(&self) -> DMatrix<f64> {
        let n = self.columns.len();
        let mut g = DMatrix::zeros(n, n);
        for j in 0..n {
            for k in j..n {
                let v = self.columns[j].inner_l2l2(&self.columns[k]).expect("shared layout");
                g[(j, k)] = v;
                g[(k, j)] = v;
            }
        }
        g
    }

    /// Gram matrix under the uniform probability measure on `[0,T] x T^d`.
    pub fn gram(&self) -> DMatrix<f64> {
        let t = self.columns.first().map_or(1.0, |c| c.t_end());
        self.l2l2_gram() / t
    }
}

/// Columns for every `tau_k`, `0 < |k| <= k_max`; the `D` tangent solves share
/// one operator assembly.
pub fn jacobian_matrix(problem: &McKVProblem, rho: &Trajectory, k_max: usize) -> Result<Jacobian> {
    let d = problem.w.dim();
    let tangent = McKVTangent::new(problem, rho)?;
    let modes = ek_modes(k_max, d);
    let columns =
        modes.par_iter().map(|k| tangent.first(&PotentialVec::unit(k_max, d, k)?)).collect::<Result<Vec<_>>>()?;
    Ok(Jacobian { k_max, modes, columns })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn grid() -> Grid {
        Grid::new(1, 16).unwrap()
    }

    fn phi(grid: Grid) -> SpectralField {
        SpectralField::from_fn(grid, |x| {
            let y = 2.0 * PI * x[0];
            1.0 + 0.4 * y.cos() + 0.2 * (2.0 * y).sin() + 0.1 * (3.0 * y).cos()
        })
    }

    fn problem(w: Vec<f64>) -> McKVProblem {
        let w = PotentialVec::new(2, 1, w).unwrap();
        McKVProblem::new(w, phi(grid()), 0.1, StepperConfig::default().with_steps(32)).unwrap()
    }

    #[test]
    fn trilinear_special_cases() {
        let g = grid();
        let r = phi(g);
        let v = PotentialVec::new(2, 1, vec![0.3, -0.1, 0.7, 0.2]).unwrap().to_field(g).unwrap();
        assert_eq!(trilinear_t(&r, &SpectralField::zeros(g), &r).unwrap().max_abs_coeff(), 0.0);
        assert!(trilinear_t(&r, &v, &SpectralField::constant(g, 1.0)).unwrap().max_abs_coeff() < 1e-15);
        let lhs = trilinear_t(&SpectralField::constant(g, 1.0), &v, &r).unwrap();
        let expected =
            v.convolve(&r).unwrap().apply_multiplier(|k| Complex64::new(-4.0 * PI * PI * (k[0] * k[0]) as f64, 0.0));
        assert!((&lhs - &expected).max_abs_coeff() < 1e-12);
    }

    #[test]
    fn uniform_density_is_stationary() {
        let p = problem(vec![0.5, -0.3, 0.8, 0.1]);
        let p = McKVProblem { phi: SpectralField::constant(*p.grid(), 1.0), ..p };
        let rho = solve_mckv(&p).unwrap();
        for node in rho.nodes() {
            assert!((node - &SpectralField::constant(*p.grid(), 1.0)).l2_norm() < 1e-14);
        }
        let d = mckv_first_derivative(&p, &PotentialVec::new(2, 1, vec![1.0; 4]).unwrap(), &rho).unwrap();
        assert_eq!(d.norm_l2l2(), 0.0);
    }

    #[test]
    fn mass_is_conserved() {
        let p = problem(vec![0.5, -0.3, 0.8, 0.1]);
        let rho = solve_mckv(&p).unwrap();
        assert!(rho.max_mass_deviation(1.0) < 1e-12);
    }

    #[test]
    fn problem_rejects_unnormalised_density() {
        let g = grid();
        let w = PotentialVec::zeros(2, 1);
        let err = McKVProblem::new(w, SpectralField::constant(g, 2.0), 0.1, StepperConfig::default());
        assert!(err.is_err());
    }

    #[test]
    fn first_derivative_is_linear() {
        let p = problem(vec![0.5, -0.3, 0.8, 0.1]);
        let rho = solve_mckv(&p).unwrap();
        let t = McKVTangent::new(&p, &rho).unwrap();
        let h1 = PotentialVec::new(2, 1, vec![1.0, 0.0, -0.5, 0.3]).unwrap();
        let h2 = PotentialVec::new(2, 1, vec![0.2, 0.9, 0.1, -0.4]).unwrap();
        let combo = h1.add_scaled(-2.5, &h2).unwrap();
        let lhs = t.first(&combo).unwrap();
        let rhs = t.first(&h1).unwrap().lincomb(1.0, &t.first(&h2).unwrap(), -2.5).unwrap();
        assert!(lhs.sub(&rhs).unwrap().norm_l2l2() <= 1e-10 * lhs.norm_l2l2());
        assert!(lhs.max_mass_deviation(0.0) < 1e-15);
    }

    #[test]
    fn first_derivative_matches_central_difference() {
        let p = problem(vec![0.5, -0.3, 0.8, 0.1]);
        let rho = solve_mckv(&p).unwrap();
        let h = PotentialVec::new(2, 1, vec![0.4, 1.0, -0.7, 0.2]).unwrap();
        let d = mckv_first_derivative(&p, &h, &rho).unwrap();
        let eps = 1e-3;
        let plus = solve_mckv(&p.with_w(p.w.add_scaled(eps, &h).unwrap()).unwrap()).unwrap();
        let minus = solve_mckv(&p.with_w(p.w.add_scaled(-eps, &h).unwrap()).unwrap()).unwrap();
        let fd = plus.lincomb(0.5 / eps, &minus, -0.5 / eps).unwrap();
        let err = fd.sub(&d).unwrap().norm_l2l2() / d.norm_l2l2();
        assert!(err < 1e-5, "relative error {err}");
    }

    #[test]
    fn second_derivative_is_symmetric_and_matches_difference() {
        let p = problem(vec![0.5, -0.3, 0.8, 0.1]);
        let rho = solve_mckv(&p).unwrap();
        let t = McKVTangent::new(&p, &rho).unwrap();
        let h1 = PotentialVec::new(2, 1, vec![1.0, 0.0, -0.5, 0.3]).unwrap();
        let h2 = PotentialVec::new(2, 1, vec![0.2, 0.9, 0.1, -0.4]).unwrap();
        let (d1, d2) = (t.first(&h1).unwrap(), t.first(&h2).unwrap());
        let s12 = t.second(&h1, &h2, &d1, &d2).unwrap();
        let s21 = t.second(&h2, &h1, &d2, &d1).unwrap();
        assert!(s12.sub(&s21).unwrap().norm_l2l2() <= 1e-10 * s12.norm_l2l2());
        let zero = PotentialVec::zeros(2, 1);
        let z = t.second(&zero, &h2, &Trajectory::zeros_like(&rho), &d2).unwrap();
        assert_eq!(z.norm_l2l2(), 0.0);

        let eps = 1e-3;
        let shifted = |s: f64| {
            let q = p.with_w(p.w.add_scaled(s, &h2).unwrap()).unwrap();
            let r = solve_mckv(&q).unwrap();
            mckv_first_derivative(&q, &h1, &r).unwrap()
        };
        let fd = shifted(eps).lincomb(0.5 / eps, &shifted(-eps), -0.5 / eps).unwrap();
        let err = fd.sub(&s12).unwrap().norm_l2l2() / s12.norm_l2l2();
        assert!(err < 1e-4, "relative error {err}");
    }

    #[test]
    fn constant_shift_of_potential_is_invisible() {
        let p = problem(vec![0.5, -0.3, 0.8, 0.1]);
        let mut shifted = p.w_field();
        shifted.set_coeff(&ModeIndex::new(vec![0]), Complex64::new(3.7, 0.0)).unwrap();
        let a = solve_mckv(&p).unwrap();
        let b = solve_mckv_field(&shifted, &p.phi, p.t_end, &p.stepper).unwrap();
        assert_eq!(a.sub(&b).unwrap().norm_l2l2(), 0.0);
    }

    #[test]
    fn jacobian_columns_and_gram() {
        let p = problem(vec![0.5, -0.3, 0.8, 0.1]);
        let rho = solve_mckv(&p).unwrap();
        let jac = jacobian_matrix(&p, &rho, 2).unwrap();
        assert_eq!(jac.len(), 4);
        let k = &jac.modes[2];
        let direct = mckv_first_derivative(&p, &PotentialVec::unit(2, 1, k).unwrap(), &rho).unwrap();
        assert_eq!(direct.sub(&jac.columns[2]).unwrap().norm_l2l2(), 0.0);
        let g = jac.gram();
        assert!((&g - g.transpose()).amax() == 0.0);
        let eig = g.symmetric_eigen();
        assert!(eig.eigenvalues.min() > -1e-14);
    }
}

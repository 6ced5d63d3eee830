use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::parabolic::{integrate, Stage, StepperConfig, Trajectory};
use crate::spectral::SpectralField;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Pointwise nonlinearity `R` with its derivative `R'`.
#[derive(Clone)]
pub struct ReactionSpec {
    name: String,
    r: ScalarFn,
    dr: ScalarFn,
    domain: Option<(f64, f64)>,
}

impl fmt::Debug for ReactionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ReactionSpec").field("name", &self.name).field("domain", &self.domain).finish()
    }
}

const SPOT_CHECK_POINTS: [f64; 7] = [-1.7, -0.9, -0.3, 0.0, 0.4, 1.1, 2.3];

impl ReactionSpec {
    /// Builds the spec after checking `R'` against a central difference of `R`
    /// at a handful of points inside the domain.
    pub fn new(
        name: impl Into<String>,
        r: impl Fn(f64) -> f64 + Send + Sync + 'static,
        dr: impl Fn(f64) -> f64 + Send + Sync + 'static,
        domain: Option<(f64, f64)>,
    ) -> Result<Self> {
        let spec = ReactionSpec { name: name.into(), r: Arc::new(r), dr: Arc::new(dr), domain };
        spec.spot_check()?;
        Ok(spec)
    }

    fn spot_check(&self) -> Result<()> {
        let h = 1e-5;
        for &x in &SPOT_CHECK_POINTS {
            if let Some((lo, hi)) = self.domain {
                if x - h < lo || x + h > hi {
                    continue;
                }
            }
            let (fx, dfx) = ((self.r)(x), (self.dr)(x));
            if !fx.is_finite() || !dfx.is_finite() {
                return Err(Error::InvalidArgument(format!("{}: non-finite value at {x}", self.name)));
            }
            let fd = ((self.r)(x + h) - (self.r)(x - h)) / (2.0 * h);
            if (fd - dfx).abs() > 1e-5 * (1.0 + dfx.abs()) {
                return Err(Error::InvalidArgument(format!(
                    "{}: derivative {dfx} disagrees with finite difference {fd} at {x}",
                    self.name
                )));
            }
        }
        Ok(())
    }

    pub fn zero() -> Self {
        Self::new("0", |_| 0.0, |_| 0.0, None).expect("consistent")
    }

    pub fn linear(lambda: f64) -> Self {
        Self::new(format!("{lambda}*u"), move |u| lambda * u, move |_| lambda, None).expect("consistent")
    }

    pub fn sine() -> Self {
        Self::new("sin(u)", f64::sin, f64::cos, None).expect("consistent")
    }

    pub fn cosine() -> Self {
        Self::new("cos(u)", f64::cos, |u: f64| -u.sin(), None).expect("consistent")
    }

    /// `R + eps H`.
    pub fn perturbed(&self, h: &ReactionSpec, eps: f64) -> Self {
        let (r, hr) = (self.r.clone(), h.r.clone());
        let (dr, dh) = (self.dr.clone(), h.dr.clone());
        let domain = match (self.domain, h.domain) {
            (Some((a, b)), Some((c, d))) => Some((a.max(c), b.min(d))),
            (a, b) => a.or(b),
        };
        ReactionSpec {
            name: format!("{} + {eps}*({})", self.name, h.name),
            r: Arc::new(move |u| r(u) + eps * hr(u)),
            dr: Arc::new(move |u| dr(u) + eps * dh(u)),
            domain,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> Option<(f64, f64)> {
        self.domain
    }

    pub fn value(&self, u: f64) -> f64 {
        (self.r)(u)
    }

    pub fn derivative(&self, u: f64) -> f64 {
        (self.dr)(u)
    }

    fn check_range(&self, values: &[f64]) -> Result<()> {
        if let Some((lo, hi)) = self.domain {
            if let Some(&value) = values.iter().find(|v| !(**v >= lo && **v <= hi)) {
                return Err(Error::RangeExcursion { value, lo, hi });
            }
        }
        Ok(())
    }
}

/// Solves `d_t u = Lap u + R(u)`, `u(0) = phi`, with `R` applied on the padded grid.
pub fn solve_rd(r: &ReactionSpec, phi: &SpectralField, t_end: f64, config: &StepperConfig) -> Result<Trajectory> {
    if phi.grid().dim() > 3 {
        return Err(Error::InvalidArgument("reaction-diffusion requires d <= 3".into()));
    }
    integrate(phi, t_end, config, |_, _, u| {
        let values = u.to_padded_physical();
        r.check_range(&values)?;
        let out: Vec<f64> = values.into_iter().map(|x| r.value(x)).collect();
        Ok(SpectralField::from_padded_physical(*u.grid(), &out))
    })
}

/// Solves `d_t i = Lap i + R'(u_R) i + H(u_R)`, `i(0) = 0`.
pub fn rd_linearisation(
    r: &ReactionSpec,
    h: &ReactionSpec,
    u: &Trajectory,
    config: &StepperConfig,
) -> Result<Trajectory> {
    if config.steps != u.steps() {
        return Err(Error::GridMismatch(format!("stepper M = {} vs base M = {}", config.steps, u.steps())));
    }
    let grid = *u.grid();
    integrate(&SpectralField::zeros(grid), u.t_end(), config, |stage: Stage, _, i| {
        let base = u.at_stage(stage).to_padded_physical();
        h.check_range(&base)?;
        let ip = i.to_padded_physical();
        let out: Vec<f64> = base.iter().zip(&ip).map(|(&b, &v)| r.derivative(b) * v + h.value(b)).collect();
        Ok(SpectralField::from_padded_physical(grid, &out))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn phi() -> SpectralField {
        let grid = Grid::new(1, 16).unwrap();
        SpectralField::from_fn(grid, |x| 0.5 + (2.0 * PI * x[0]).cos() + 0.3 * (4.0 * PI * x[0]).sin())
    }

    #[test]
    fn inconsistent_derivative_is_rejected() {
        assert!(ReactionSpec::new("bad", f64::sin, f64::sin, None).is_err());
    }

    #[test]
    fn zero_reaction_is_heat_flow() {
        let config = StepperConfig::default().with_steps(16);
        let u = solve_rd(&ReactionSpec::zero(), &phi(), 0.1, &config).unwrap();
        let expected =
            phi().apply_multiplier(|k| Complex64::new((-4.0 * PI * PI * (k[0] * k[0]) as f64 * 0.1).exp(), 0.0));
        assert!((u.final_state() - &expected).max_abs_coeff() < 1e-12);
    }

    #[test]
    fn linear_reaction_scales_heat_flow() {
        let lambda = 0.25;
        let config = StepperConfig::default().with_steps(256);
        let u = solve_rd(&ReactionSpec::linear(lambda), &phi(), 0.5, &config).unwrap();
        let exact = Trajectory::map_stages(&u, |s| {
            let t = match s {
                Stage::Node(n) => u.time(n),
                Stage::Predictor(n) => u.time(n + 1),
            };
            Ok(phi()
                .apply_multiplier(|k| Complex64::new(((lambda - 4.0 * PI * PI * (k[0] * k[0]) as f64) * t).exp(), 0.0)))
        })
        .unwrap();
        let err = u.sub(&exact).unwrap().norm_l2l2() / exact.norm_l2l2();
        assert!(err < 1e-8, "relative error {err}");
    }

    #[test]
    fn range_excursion_is_reported() {
        let r = ReactionSpec::new("log", |u: f64| u.ln(), |u| 1.0 / u, Some((1e-9, 10.0))).unwrap();
        let err = solve_rd(&r, &phi(), 0.1, &StepperConfig::default().with_steps(4));
        assert!(matches!(err, Err(Error::RangeExcursion { .. })));
    }

    #[test]
    fn linearisation_matches_central_difference() {
        let config = StepperConfig::default().with_steps(64);
        let (r, h) = (ReactionSpec::sine(), ReactionSpec::cosine());
        let u = solve_rd(&r, &phi(), 0.25, &config).unwrap();
        let i = rd_linearisation(&r, &h, &u, &config).unwrap();
        let eps = 1e-3;
        let plus = solve_rd(&r.perturbed(&h, eps), &phi(), 0.25, &config).unwrap();
        let minus = solve_rd(&r.perturbed(&h, -eps), &phi(), 0.25, &config).unwrap();
        let fd = plus.lincomb(0.5 / eps, &minus, -0.5 / eps).unwrap();
        let err = fd.sub(&i).unwrap().norm_l2l2() / i.norm_l2l2();
        assert!(err < 1e-6, "relative error {err}");
    }
}

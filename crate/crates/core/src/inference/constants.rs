use serde::{Deserialize, Serialize};

/// `delta_N = N^{-(alpha+1)/(2(alpha+1)+d)}`.
pub fn delta_n(alpha: f64, d: usize, n: usize) -> f64 {
    let a = alpha + 1.0;
    (n as f64).powf(-a / (2.0 * a + d as f64))
}

/// `eta = (beta-2)/beta - 3 zeta / (2(alpha+1))`.
pub fn eta(alpha: f64, beta: f64, zeta: f64) -> f64 {
    (beta - 2.0) / beta - 3.0 * zeta / (2.0 * (alpha + 1.0))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Strict,
    #[default]
    Experimental,
}

/// Smoothness and scaling exponents.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsConfig {
    pub d: usize,
    pub alpha: f64,
    pub beta: f64,
    pub zeta: f64,
    pub w: f64,
    #[serde(default)]
    pub mode: Mode,
}

/// Open interval `(lo, hi)` admissible for `zeta` given `alpha`, `beta`, `d`.
pub fn zeta_window(alpha: f64, beta: f64, d: usize) -> (f64, f64) {
    (beta + d as f64 / 2.0, (alpha + 1.0) / 12.0)
}

/// Open interval admissible for the radius exponent `w`.
pub fn w_window(alpha: f64, beta: f64, zeta: f64, d: usize) -> (f64, f64) {
    let d = d as f64;
    let a = alpha + 1.0;
    let hi = ((a * (beta - 2.0) / beta - 1.5 * zeta).min(a - 6.0 * zeta)) / d;
    (6.0 * zeta / d, hi)
}

/// Numerical inputs for the bias, prior-smoothness and cutoff checks.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AssumptionInputs {
    pub n_data: Option<usize>,
    pub k_max: Option<usize>,
    pub c_pr: Option<f64>,
    pub c_err: Option<f64>,
    /// `||rho_{W_0} - rho_{W_{0,K}}||` under the uniform probability measure.
    pub forward_bias: Option<f64>,
    /// `||W_0 - W_{0,K}||_{L^2}`.
    pub inverse_bias: Option<f64>,
    pub cutoff_c: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsReport {
    pub mode: Mode,
    pub checks: Vec<ConstraintCheck>,
    pub eta: f64,
    pub zeta_window: (f64, f64),
    pub w_window: (f64, f64),
    pub delta_n: Option<f64>,
    pub cutoff_k: Option<f64>,
    /// Every check passed.
    pub valid: bool,
}

impl ConstantsReport {
    /// Strict mode needs every check; experimental mode only reports.
    pub fn accepted(&self) -> bool {
        self.mode == Mode::Experimental || self.valid
    }

    pub fn failures(&self) -> Vec<&ConstraintCheck> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

fn check(name: &str, passed: bool, detail: String) -> ConstraintCheck {
    ConstraintCheck { name: name.into(), passed, detail }
}

/// Evaluates the admissibility conditions on the exponents, plus any supplied
/// assumption inputs. Never fails; the report carries the verdicts.
pub fn validate_constants(cfg: &ConstantsConfig, inputs: &AssumptionInputs) -> ConstantsReport {
    let ConstantsConfig { d, alpha, beta, zeta, w, mode } = *cfg;
    let df = d as f64;
    let zw = zeta_window(alpha, beta, d);
    let ww = w_window(alpha, beta, zeta, d);
    let beta_even = beta.fract() == 0.0 && (beta as i64) % 2 == 0;
    let mut checks = vec![
        check(
            "beta >= 4 + d, even integer",
            beta >= 4.0 + df && beta_even,
            format!("beta = {beta}, 4 + d = {}", 4.0 + df),
        ),
        check(
            "alpha > 12 beta + 6 d - 1",
            alpha > 12.0 * beta + 6.0 * df - 1.0,
            format!("alpha = {alpha}, bound = {}", 12.0 * beta + 6.0 * df - 1.0),
        ),
        check(
            "beta + d/2 < zeta < (alpha+1)/12",
            zw.0 < zeta && zeta < zw.1,
            format!("zeta = {zeta}, window = ({}, {})", zw.0, zw.1),
        ),
        check("w window", ww.0 < w && w < ww.1, format!("w = {w}, window = ({}, {})", ww.0, ww.1)),
    ];
    let delta = inputs.n_data.map(|n| delta_n(alpha, d, n));
    let e = eta(alpha, beta, zeta);
    if let (Some(delta), Some(b)) = (delta, inputs.forward_bias) {
        checks.push(check("forward bias <= delta_N / 2", b <= delta / 2.0, format!("{b:e} vs {:e}", delta / 2.0)));
    }
    if let (Some(delta), Some(b), Some(c)) = (delta, inputs.inverse_bias, inputs.c_err) {
        let bound = c * delta.powf(e);
        checks.push(check("inverse bias <= c_err delta_N^eta", b <= bound, format!("{b:e} vs {bound:e}")));
    }
    if let (Some(delta), Some(n), Some(k), Some(c)) = (delta, inputs.n_data, inputs.k_max, inputs.c_pr) {
        let dim = crate::spectral::count_dim(k, d) as f64;
        let bound = c * n as f64 * delta * delta;
        checks.push(check("D <= c_pr N delta_N^2", dim <= bound, format!("D = {dim}, bound = {bound:e}")));
    }
    let cutoff_k = match (delta, inputs.n_data, inputs.cutoff_c) {
        (Some(delta), Some(n), Some(c)) => Some(c * (n as f64 * delta * delta).powf(1.0 / df)),
        _ => None,
    };
    let valid = checks.iter().all(|c| c.passed);
    ConstantsReport { mode, checks, eta: e, zeta_window: zw, w_window: ww, delta_n: delta, cutoff_k, valid }
}

/// Ball radius: `r_tilde D^{-w}` in strict mode, `r_tilde` otherwise.
pub fn surrogate_radius(mode: Mode, r_tilde: f64, dim: usize, w: f64) -> f64 {
    match mode {
        Mode::Strict => r_tilde * (dim as f64).powf(-w),
        Mode::Experimental => r_tilde,
    }
}

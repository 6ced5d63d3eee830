use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::likelihood::LikelihoodModel;
use crate::error::{Error, Result};
use crate::spectral::PotentialVec;

const QUADRATURE_POINTS: usize = 64;

fn bump(x: f64) -> f64 {
    if x.abs() < 1.0 {
        (-1.0 / (1.0 - x * x)).exp()
    } else {
        0.0
    }
}

/// Midpoint nodes on `(-1, 1)` with bump weights normalised to sum to one.
fn mollifier_rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let h = 2.0 / QUADRATURE_POINTS as f64;
        let nodes: Vec<f64> = (0..QUADRATURE_POINTS).map(|q| -1.0 + (q as f64 + 0.5) * h).collect();
        let total: f64 = nodes.iter().map(|&s| bump(s)).sum();
        nodes.into_iter().map(|s| (s, bump(s) / total)).collect()
    })
}

/// `0` below `5r/8`, `(t - 5r/8)^2` above.
pub fn gamma_tilde(r: f64, t: f64) -> f64 {
    let s = t - 5.0 * r / 8.0;
    if s < 0.0 {
        0.0
    } else {
        s * s
    }
}

pub fn gamma_tilde_prime(r: f64, t: f64) -> f64 {
    2.0 * (t - 5.0 * r / 8.0).max(0.0)
}

/// `gamma_tilde_r` mollified at width `r/8`. A convex combination of shifted
/// convex functions, hence convex and nondecreasing.
pub fn gamma_r(r: f64, t: f64) -> f64 {
    let h = r / 8.0;
    mollifier_rule().iter().map(|&(s, w)| w * gamma_tilde(r, t - h * s)).sum()
}

pub fn gamma_r_prime(r: f64, t: f64) -> f64 {
    let h = r / 8.0;
    mollifier_rule().iter().map(|&(s, w)| w * gamma_tilde_prime(r, t - h * s)).sum()
}

fn psi(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

fn psi_prime(x: f64) -> f64 {
    if x > 0.0 {
        psi(x) / (x * x)
    } else {
        0.0
    }
}

/// Smooth cutoff: `1` on `[0, 3/4]`, `0` on `[7/8, inf)`.
pub fn cutoff(t: f64) -> f64 {
    let s = 8.0 * (t - 0.75);
    if s <= 0.0 {
        return 1.0;
    }
    if s >= 1.0 {
        return 0.0;
    }
    let (a, b) = (psi(1.0 - s), psi(s));
    a / (a + b)
}

pub fn cutoff_prime(t: f64) -> f64 {
    let s = 8.0 * (t - 0.75);
    if s <= 0.0 || s >= 1.0 {
        return 0.0;
    }
    let (a, b) = (psi(1.0 - s), psi(s));
    let (da, db) = (-psi_prime(1.0 - s), psi_prime(s));
    8.0 * (da * b - a * db) / ((a + b) * (a + b))
}

/// `max(N log N / r^2, C N (c1 + 1)(1 + r^-2))`.
pub fn lambda_min(n: usize, r: f64, c_hat: f64, c1: f64) -> f64 {
    let nf = n as f64;
    (nf * nf.ln() / (r * r)).max(c_hat * nf * (c1 + 1.0) * (1.0 + 1.0 / (r * r)))
}

/// Ball radius, centre and tail weight of the surrogate likelihood.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurrogateSpec {
    pub r: f64,
    pub w_init: PotentialVec,
    pub lambda: f64,
}

impl SurrogateSpec {
    pub fn new(r: f64, w_init: PotentialVec, lambda: f64) -> Result<Self> {
        if !(r > 0.0) || !(lambda >= 0.0) {
            return Err(Error::InvalidArgument(format!("need r > 0 and lambda >= 0 (r = {r}, lambda = {lambda})")));
        }
        Ok(SurrogateSpec { r, w_init, lambda })
    }

    /// `lambda >= lambda_min(N, r, C, c1)`.
    pub fn satisfies_lambda_bound(&self, n: usize, c_hat: f64, c1: f64) -> bool {
        self.lambda >= lambda_min(n, self.r, c_hat, c1)
    }

    /// `||W_init - W_{0,K}|| <= r/8`.
    pub fn init_within_reach(&self, w0k: &PotentialVec) -> Result<bool> {
        Ok(self.w_init.add_scaled(-1.0, w0k)?.norm() <= self.r / 8.0)
    }

    fn offset(&self, w: &PotentialVec) -> Result<(PotentialVec, f64)> {
        let delta = w.add_scaled(-1.0, &self.w_init)?;
        let t = delta.norm();
        Ok((delta, t))
    }

    /// `lambda gamma_r(||W - W_init||)` and its gradient.
    pub fn tail_penalty(&self, w: &PotentialVec) -> Result<(f64, PotentialVec)> {
        let (delta, t) = self.offset(w)?;
        let dg = self.lambda * gamma_r_prime(self.r, t);
        let scale = if t > 0.0 { dg / t } else { 0.0 };
        Ok((self.lambda * gamma_r(self.r, t), delta.with_values(delta.values().iter().map(|v| scale * v).collect())?))
    }
}

/// `alpha_r l_N - lambda g_r` and its gradient; the forward solve is skipped
/// where the cutoff vanishes.
pub fn surrogate_loglik(
    model: &LikelihoodModel,
    spec: &SurrogateSpec,
    w: &PotentialVec,
) -> Result<(f64, PotentialVec)> {
    let (delta, t) = spec.offset(w)?;
    let (penalty, penalty_grad) = spec.tail_penalty(w)?;
    let a = cutoff(t / spec.r);
    let mut value = -penalty;
    let mut grad: Vec<f64> = penalty_grad.values().iter().map(|g| -g).collect();
    if a > 0.0 {
        let (l, gl) = model.log_likelihood_and_gradient(w)?;
        value += a * l;
        let da = if t > 0.0 { cutoff_prime(t / spec.r) / (spec.r * t) } else { 0.0 };
        for ((g, gl), dv) in grad.iter_mut().zip(gl.values()).zip(delta.values()) {
            *g += a * gl + l * da * dv;
        }
    }
    Ok((value, w.with_values(grad)?))
}

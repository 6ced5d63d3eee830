//! Real trigonometric basis `tau_k` of the mean-zero space `E_K`.
//!
//! `tau_k(x) = prod_j T_{k_j}(x_j)` with `T_0 = 1`, `T_m = sqrt(2) cos(2 pi m y)`
//! for `m > 0` and `T_m = sqrt(2) sin(2 pi m y)` for `m < 0`. The basis is
//! orthonormal in `L^2(T^d)`, so coordinate vectors carry the `L^2` geometry.
//!
//! Mode order: lexicographic in `(k_1, ..., k_d)` over the ball `0 < |k| <= K`.
//! This order is used for every coordinate vector, matrix and file.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Grid, ModeIndex, SpectralField};
use crate::error::{Error, Result};

/// `tau_k(x)`.
pub fn basis_tau(k: &ModeIndex, x: &[f64]) -> f64 {
    assert_eq!(k.dim(), x.len(), "mode/point dimension");
    k.components()
        .iter()
        .zip(x)
        .map(|(&m, &y)| match m.signum() {
            0 => 1.0,
            1 => SQRT_2 * (2.0 * PI * m as f64 * y).cos(),
            _ => SQRT_2 * (2.0 * PI * m as f64 * y).sin(),
        })
        .product()
}

/// Exponential expansion `tau_k = sum_q c_q e_q`.
pub(crate) fn tau_components(k: &[i64]) -> Vec<(Vec<i64>, Complex64)> {
    let mut terms: Vec<(Vec<i64>, Complex64)> = vec![(Vec::new(), Complex64::new(1.0, 0.0))];
    for &m in k {
        let factors: Vec<(i64, Complex64)> = match m.signum() {
            0 => vec![(0, Complex64::new(1.0, 0.0))],
            1 => vec![(m, Complex64::new(FRAC_1_SQRT_2, 0.0)), (-m, Complex64::new(FRAC_1_SQRT_2, 0.0))],
            // sqrt(2) sin(t) = sqrt(2) (e^{it} - e^{-it}) / (2i)
            _ => vec![(m, Complex64::new(0.0, -FRAC_1_SQRT_2)), (-m, Complex64::new(0.0, FRAC_1_SQRT_2))],
        };
        terms = terms
            .into_iter()
            .flat_map(|(q, c)| {
                factors.iter().map(move |&(qm, cm)| {
                    let mut q = q.clone();
                    q.push(qm);
                    (q, c * cm)
                })
            })
            .collect();
    }
    terms
}

/// Modes `0 < |k| <= K` in lexicographic order.
pub fn ek_modes(k_max: usize, d: usize) -> Vec<ModeIndex> {
    let kk = k_max as i64;
    let side = 2 * kk + 1;
    let total = side.pow(d as u32);
    (0..total)
        .map(|mut flat| {
            let mut k = vec![0i64; d];
            for axis in (0..d).rev() {
                k[axis] = flat % side - kk;
                flat /= side;
            }
            ModeIndex(k)
        })
        .filter(|k| !k.is_zero() && k.norm_sq() <= kk * kk)
        .collect()
}

/// `D = dim E_K = #{k != 0 : |k| <= K}`.
pub fn count_dim(k_max: usize, d: usize) -> usize {
    ek_modes(k_max, d).len()
}

/// Coordinates of a mean-zero trigonometric polynomial in the `tau_k` basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialVec {
    k_max: usize,
    d: usize,
    values: Vec<f64>,
}

impl PotentialVec {
    pub fn new(k_max: usize, d: usize, values: Vec<f64>) -> Result<Self> {
        let dim = count_dim(k_max, d);
        if values.len() != dim {
            return Err(Error::InvalidArgument(format!(
                "{} coordinates for dim E_K = {dim} (K = {k_max}, d = {d})",
                values.len()
            )));
        }
        Ok(PotentialVec { k_max, d, values })
    }

    pub fn zeros(k_max: usize, d: usize) -> Self {
        PotentialVec { k_max, d, values: vec![0.0; count_dim(k_max, d)] }
    }

    /// Unit vector along `tau_k`.
    pub fn unit(k_max: usize, d: usize, k: &ModeIndex) -> Result<Self> {
        let idx = ek_modes(k_max, d)
            .iter()
            .position(|m| m == k)
            .ok_or_else(|| Error::InvalidArgument(format!("mode {:?} not in E_K", k.0)))?;
        let mut out = Self::zeros(k_max, d);
        out.values[idx] = 1.0;
        Ok(out)
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn modes(&self) -> Vec<ModeIndex> {
        ek_modes(self.k_max, self.d)
    }

    /// Euclidean norm, equal to the `L^2` norm of the represented function.
    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `H^s` norm with weight `(1+|k|^2)^s`.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        self.modes()
            .iter()
            .zip(&self.values)
            .map(|(k, v)| (1.0 + k.norm_sq() as f64).powf(s) * v * v)
            .sum::<f64>()
            .sqrt()
    }

    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.k_max, self.d, values)
    }

    /// `self + a * other`.
    pub fn add_scaled(&self, a: f64, other: &PotentialVec) -> Result<Self> {
        self.check_same(other)?;
        let values = self.values.iter().zip(&other.values).map(|(x, y)| x + a * y).collect();
        Ok(PotentialVec { values, ..*self })
    }

    fn check_same(&self, other: &PotentialVec) -> Result<()> {
        if self.k_max != other.k_max || self.d != other.d {
            return Err(Error::InvalidArgument(format!(
                "E_K mismatch: (K={}, d={}) vs (K={}, d={})",
                self.k_max, self.d, other.k_max, other.d
            )));
        }
        Ok(())
    }

    /// Re-expresses the vector in `E_{K'}`; modes outside the smaller ball are dropped.
    pub fn embed(&self, k_max: usize) -> Self {
        let target = ek_modes(k_max, self.d);
        let values =
            target.iter().map(|k| self.modes().iter().position(|m| m == k).map_or(0.0, |i| self.values[i])).collect();
        PotentialVec { k_max, d: self.d, values }
    }

    /// Synthesises the represented function on `grid`.
    pub fn to_field(&self, grid: Grid) -> Result<SpectralField> {
        if grid.dim() != self.d {
            return Err(Error::GridMismatch(format!("d = {} vs grid d = {}", self.d, grid.dim())));
        }
        if self.k_max > grid.max_mode() {
            return Err(Error::TruncationTooLarge { k: self.k_max, max: grid.max_mode() });
        }
        let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.len()];
        for (k, &v) in self.modes().iter().zip(&self.values) {
            if v == 0.0 {
                continue;
            }
            for (q, c) in tau_components(k.components()) {
                let idx = grid.index_of(&q).expect("mode within resolved range");
                coeffs[idx] += c * v;
            }
        }
        SpectralField::from_coefficients(grid, coeffs)
    }
}

/// `<f, tau_k>` for `0 < |k| <= K`; the mean of `f` is discarded.
pub fn project_to_ek(f: &SpectralField, k_max: usize) -> Result<PotentialVec> {
    let grid = f.grid();
    if k_max > grid.max_mode() {
        return Err(Error::TruncationTooLarge { k: k_max, max: grid.max_mode() });
    }
    let d = grid.dim();
    let values = ek_modes(k_max, d)
        .iter()
        .map(|k| {
            // int f e_q dx = f_{-q}
            tau_components(k.components())
                .into_iter()
                .map(|(q, c)| {
                    let neg: Vec<i64> = q.iter().map(|x| -x).collect();
                    (c * f.coeff(&ModeIndex(neg))).re
                })
                .sum()
        })
        .collect();
    Ok(PotentialVec { k_max, d, values })
}

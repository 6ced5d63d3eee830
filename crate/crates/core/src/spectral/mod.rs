//! Fourier core on the unit torus `T^d = [0,1)^d`.
//!
//! Fields are stored as complex Fourier coefficients `f_k = <f, e_k>` with
//! `e_k(x) = exp(2 pi i k.x)`, laid out in FFT order on an `n^d` row-major
//! array (axis 0 slowest). Only modes with `|k_j| <= (n-1)/2` are resolved;
//! the Nyquist row of an even grid is kept at zero. Every constructor and
//! operator returns a conjugate-symmetric array, so fields are always real.

mod basis;
mod fft;
mod io;
mod points;

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use basis::{basis_tau, count_dim, ek_modes, project_to_ek, PotentialVec};
pub(crate) use fft::{transform, Direction};
pub use io::{read_field, write_field, FieldSidecar};
pub use points::PointSet;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Integer wave vector `k` in `Z^d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModeIndex(pub Vec<i64>);

impl ModeIndex {
    pub fn new(k: impl Into<Vec<i64>>) -> Self {
        ModeIndex(k.into())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[i64] {
        &self.0
    }

    pub fn norm_sq(&self) -> i64 {
        self.0.iter().map(|k| k * k).sum()
    }

    /// Euclidean length `|k|`.
    pub fn norm(&self) -> f64 {
        (self.norm_sq() as f64).sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&k| k == 0)
    }
}

/// Uniform `n^d` grid plus the padded size used for dealiased products.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    d: usize,
    n: usize,
    padded: usize,
}

impl Grid {
    /// Grid with the 3/2 padding rule.
    pub fn new(d: usize, n: usize) -> Result<Self> {
        Self::with_padding(d, n, 1.5)
    }

    pub fn with_padding(d: usize, n: usize, factor: f64) -> Result<Self> {
        if !(1..=3).contains(&d) {
            return Err(Error::InvalidArgument(format!("dimension d = {d} not in 1..=3")));
        }
        if n < 3 {
            return Err(Error::InvalidArgument(format!("grid size n = {n} < 3")));
        }
        if !(factor >= 1.0) || !factor.is_finite() {
            return Err(Error::InvalidArgument(format!("padding factor {factor} < 1")));
        }
        let padded = ((factor * n as f64).ceil() as usize).max(n);
        Ok(Grid { d, n, padded })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn points_per_axis(&self) -> usize {
        self.n
    }

    pub fn padded_points_per_axis(&self) -> usize {
        self.padded
    }

    pub fn padding_factor(&self) -> f64 {
        self.padded as f64 / self.n as f64
    }

    /// Largest resolved wavenumber per axis, `(n-1)/2`.
    pub fn max_mode(&self) -> usize {
        (self.n - 1) / 2
    }

    /// Number of stored coefficients, `n^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn padded_len(&self) -> usize {
        self.padded.pow(self.d as u32)
    }

    fn axis_wavenumber(&self, i: usize) -> Option<i64> {
        let kmax = self.max_mode();
        if i <= kmax {
            Some(i as i64)
        } else if i >= self.n - kmax {
            Some(i as i64 - self.n as i64)
        } else {
            None
        }
    }

    /// Wave vector stored at `flat`, or `None` for the Nyquist row of even grids.
    pub(crate) fn wavevector(&self, flat: usize) -> Option<[i64; 3]> {
        let mut k = [0i64; 3];
        let mut rest = flat;
        for axis in (0..self.d).rev() {
            k[axis] = self.axis_wavenumber(rest % self.n)?;
            rest /= self.n;
        }
        Some(k)
    }

    /// Flat index of mode `k`, if resolved.
    pub fn index_of(&self, k: &[i64]) -> Option<usize> {
        if k.len() != self.d {
            return None;
        }
        let kmax = self.max_mode() as i64;
        let mut flat = 0usize;
        for &kj in k {
            if kj.abs() > kmax {
                return None;
            }
            flat = flat * self.n + kj.rem_euclid(self.n as i64) as usize;
        }
        Some(flat)
    }

    fn negated_index(&self, flat: usize) -> usize {
        let mut out = 0usize;
        let mut rest = flat;
        let mut scale = 1usize;
        for _ in 0..self.d {
            let i = rest % self.n;
            rest /= self.n;
            out += ((self.n - i) % self.n) * scale;
            scale *= self.n;
        }
        out
    }

    fn padded_index(&self, k: &[i64; 3]) -> usize {
        let m = self.padded as i64;
        k[..self.d].iter().fold(0usize, |acc, &kj| acc * self.padded + kj.rem_euclid(m) as usize)
    }

    /// Physical grid point `x_j` for a flat index on the `n^d` grid.
    pub fn point(&self, flat: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.d];
        let mut rest = flat;
        for axis in (0..self.d).rev() {
            x[axis] = (rest % self.n) as f64 / self.n as f64;
            rest /= self.n;
        }
        x
    }

    fn check_same(&self, other: &Grid) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch(format!("{self:?} vs {other:?}")));
        }
        Ok(())
    }
}

fn k_sq(k: &[i64; 3]) -> f64 {
    (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64
}

/// Real scalar field on `T^d` held by its Fourier coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: Grid) -> Self {
        SpectralField { grid, coeffs: vec![ZERO; grid.len()] }
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        let mut field = Self::zeros(grid);
        field.coeffs[0] = Complex64::new(value, 0.0);
        field
    }

    /// Wraps raw FFT-ordered coefficients, projecting onto real, resolved fields.
    pub fn from_coefficients(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::GridMismatch(format!("{} coefficients for a grid of {}", coeffs.len(), grid.len())));
        }
        let mut field = SpectralField { grid, coeffs };
        field.enforce_real();
        Ok(field)
    }

    /// Samples `f` on the grid and transforms.
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> f64) -> Self {
        let values: Vec<f64> = (0..grid.len()).map(|i| f(&grid.point(i))).collect();
        Self::from_physical(grid, &values)
    }

    pub fn from_physical(grid: Grid, values: &[f64]) -> Self {
        assert_eq!(values.len(), grid.len(), "physical array size");
        let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        transform(&mut data, grid.n, grid.d, Direction::Forward);
        let scale = 1.0 / grid.len() as f64;
        data.iter_mut().for_each(|c| *c *= scale);
        let mut field = SpectralField { grid, coeffs: data };
        field.enforce_real();
        field
    }

    /// Values on the `n^d` grid.
    pub fn to_physical(&self) -> Vec<f64> {
        let mut data = self.coeffs.clone();
        transform(&mut data, self.grid.n, self.grid.d, Direction::Inverse);
        data.into_iter().map(|c| c.re).collect()
    }

    /// Values on the padded grid used for dealiased products.
    pub fn to_padded_physical(&self) -> Vec<f64> {
        let grid = &self.grid;
        let mut data = vec![ZERO; grid.padded_len()];
        for (flat, c) in self.coeffs.iter().enumerate() {
            if *c == ZERO {
                continue;
            }
            if let Some(k) = grid.wavevector(flat) {
                data[grid.padded_index(&k)] = *c;
            }
        }
        transform(&mut data, grid.padded, grid.d, Direction::Inverse);
        data.into_iter().map(|c| c.re).collect()
    }

    /// Inverse of [`to_padded_physical`](Self::to_padded_physical) followed by truncation.
    pub fn from_padded_physical(grid: Grid, values: &[f64]) -> Self {
        assert_eq!(values.len(), grid.padded_len(), "padded array size");
        let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        transform(&mut data, grid.padded, grid.d, Direction::Forward);
        let scale = 1.0 / grid.padded_len() as f64;
        let mut field = Self::zeros(grid);
        for flat in 0..grid.len() {
            if let Some(k) = grid.wavevector(flat) {
                field.coeffs[flat] = data[grid.padded_index(&k)] * scale;
            }
        }
        field.enforce_real();
        field
    }

    fn enforce_real(&mut self) {
        let grid = self.grid;
        for flat in 0..grid.len() {
            if grid.wavevector(flat).is_none() {
                self.coeffs[flat] = ZERO;
                continue;
            }
            let neg = grid.negated_index(flat);
            if neg < flat {
                continue;
            }
            if neg == flat {
                self.coeffs[flat].im = 0.0;
            } else {
                let avg = (self.coeffs[flat] + self.coeffs[neg].conj()) * 0.5;
                self.coeffs[flat] = avg;
                self.coeffs[neg] = avg.conj();
            }
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient at `k`; zero for unresolved modes.
    pub fn coeff(&self, k: &ModeIndex) -> Complex64 {
        self.grid.index_of(k.components()).map_or(ZERO, |i| self.coeffs[i])
    }

    /// Sets `f_k = value` and `f_{-k} = conj(value)`.
    pub fn set_coeff(&mut self, k: &ModeIndex, value: Complex64) -> Result<()> {
        let i = self
            .grid
            .index_of(k.components())
            .ok_or_else(|| Error::InvalidArgument(format!("mode {:?} not resolved on {:?}", k.0, self.grid)))?;
        let neg = self.grid.negated_index(i);
        if neg == i {
            self.coeffs[i] = Complex64::new(value.re, 0.0);
        } else {
            self.coeffs[i] = value;
            self.coeffs[neg] = value.conj();
        }
        Ok(())
    }

    /// Zero mode, i.e. the integral of the field over the torus.
    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    /// Resolved modes with their coefficients.
    pub fn modes(&self) -> impl Iterator<Item = (ModeIndex, Complex64)> + '_ {
        (0..self.grid.len()).filter_map(move |flat| {
            self.grid.wavevector(flat).map(|k| (ModeIndex(k[..self.grid.d].to_vec()), self.coeffs[flat]))
        })
    }

    /// Largest `|f_k - conj(f_{-k})|`.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        (0..self.grid.len())
            .map(|i| (self.coeffs[i] - self.coeffs[self.grid.negated_index(i)].conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Multiplies each coefficient by `symbol(k)`.
    pub fn apply_multiplier(&self, symbol: impl Fn(&[i64; 3]) -> Complex64) -> Self {
        let mut out = self.clone();
        for (flat, c) in out.coeffs.iter_mut().enumerate() {
            if let Some(k) = self.grid.wavevector(flat) {
                *c *= symbol(&k);
            }
        }
        out
    }

    /// In-place coefficient map; `f` must respect conjugate symmetry.
    pub(crate) fn map_coeffs(&mut self, f: impl Fn(usize, Complex64) -> Complex64) {
        for (i, c) in self.coeffs.iter_mut().enumerate() {
            *c = f(i, *c);
        }
    }

    pub fn scale_in_place(&mut self, a: f64) {
        self.coeffs.iter_mut().for_each(|c| *c *= a);
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &SpectralField) -> Result<()> {
        self.grid.check_same(&other.grid)?;
        for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *x += y * a;
        }
        Ok(())
    }

    /// `(f * g)_k = f_k g_k` on the unit torus.
    pub fn convolve(&self, other: &SpectralField) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b).collect();
        Ok(SpectralField { grid: self.grid, coeffs })
    }

    /// Partial derivative along `axis`, symbol `2 pi i k_axis`.
    pub fn partial(&self, axis: usize) -> Self {
        self.apply_multiplier(|k| Complex64::new(0.0, 2.0 * PI * k[axis] as f64))
    }

    pub fn gradient(&self) -> Vec<SpectralField> {
        (0..self.grid.d).map(|axis| self.partial(axis)).collect()
    }

    pub fn divergence(components: &[SpectralField]) -> Result<SpectralField> {
        let first = components.first().ok_or_else(|| Error::InvalidArgument("empty vector field".into()))?;
        if components.len() != first.grid.d {
            return Err(Error::GridMismatch(format!("{} components for d = {}", components.len(), first.grid.d)));
        }
        let mut out = SpectralField::zeros(first.grid);
        for (axis, component) in components.iter().enumerate() {
            out.axpy(1.0, &component.partial(axis))?;
        }
        Ok(out)
    }

    /// Symbol `-4 pi^2 |k|^2`.
    pub fn laplacian(&self) -> Self {
        self.apply_multiplier(|k| Complex64::new(-4.0 * PI * PI * k_sq(k), 0.0))
    }

    /// Real `L^2(T^d)` inner product.
    pub fn inner(&self, other: &SpectralField) -> Result<f64> {
        self.grid.check_same(&other.grid)?;
        Ok(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| (a * b.conj()).re).sum())
    }

    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `(sum_k (1+|k|^2)^s |f_k|^2)^{1/2}`; negative `s` gives the dual norms.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        (0..self.grid.len())
            .filter_map(|flat| {
                self.grid.wavevector(flat).map(|k| (1.0 + k_sq(&k)).powf(s) * self.coeffs[flat].norm_sqr())
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Keeps modes with Euclidean `|k| <= k_max`.
    pub fn lowpass(&self, k_max: f64) -> Self {
        let cutoff = k_max * k_max + 1e-9;
        self.apply_multiplier(|k| if k_sq(k) <= cutoff { Complex64::new(1.0, 0.0) } else { ZERO })
    }

    /// Exact trigonometric synthesis at `x`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.grid.d, "point dimension");
        let mut sum = 0.0;
        for (flat, c) in self.coeffs.iter().enumerate() {
            if *c == ZERO {
                continue;
            }
            if let Some(k) = self.grid.wavevector(flat) {
                let phase: f64 = (0..self.grid.d).map(|j| k[j] as f64 * x[j]).sum::<f64>();
                let (s, co) = (2.0 * PI * phase).sin_cos();
                sum += c.re * co - c.im * s;
            }
        }
        sum
    }

    /// Dealiased pointwise product `f g`.
    pub fn product(&self, other: &SpectralField) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        let a = self.to_padded_physical();
        let b = other.to_padded_physical();
        let values: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        Ok(Self::from_padded_physical(self.grid, &values))
    }

    /// Applies `f` pointwise on the padded grid and truncates back.
    pub fn map_pointwise(&self, f: impl Fn(f64) -> f64) -> Self {
        let values: Vec<f64> = self.to_padded_physical().into_iter().map(f).collect();
        Self::from_padded_physical(self.grid, &values)
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        assert_eq!(self.grid, rhs.grid, "grid mismatch in addition");
        let coeffs = self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect();
        SpectralField { grid: self.grid, coeffs }
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        assert_eq!(self.grid, rhs.grid, "grid mismatch in subtraction");
        let coeffs = self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect();
        SpectralField { grid: self.grid, coeffs }
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        SpectralField { grid: self.grid, coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, a: f64) -> SpectralField {
        SpectralField { grid: self.grid, coeffs: self.coeffs.iter().map(|c| c * a).collect() }
    }
}

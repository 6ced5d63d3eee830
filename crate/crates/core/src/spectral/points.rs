use std::f64::consts::PI;

use super::{Grid, SpectralField};
use crate::error::{Error, Result};

/// Fixed set of points with the Fourier phases tabulated once, so repeated
/// synthesis costs one dot product per point.
#[derive(Clone, Debug)]
pub struct PointSet {
    grid: Grid,
    points: Vec<Vec<f64>>,
    // per point: (cos, sin) of 2 pi k.x over the grid layout
    phases: Vec<Vec<(f64, f64)>>,
}

impl PointSet {
    pub fn new(grid: Grid, points: Vec<Vec<f64>>) -> Result<Self> {
        if let Some(p) = points.iter().find(|p| p.len() != grid.dim()) {
            return Err(Error::InvalidArgument(format!("point {p:?} has wrong dimension")));
        }
        let phases = points
            .iter()
            .map(|x| {
                (0..grid.len())
                    .map(|flat| match grid.wavevector(flat) {
                        Some(k) => {
                            let phase: f64 = (0..grid.dim()).map(|j| k[j] as f64 * x[j]).sum();
                            let (s, c) = (2.0 * PI * phase).sin_cos();
                            (c, s)
                        }
                        None => (0.0, 0.0),
                    })
                    .collect()
            })
            .collect();
        Ok(PointSet { grid, points, phases })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    /// `f(x_i)`.
    pub fn eval(&self, f: &SpectralField, i: usize) -> f64 {
        debug_assert_eq!(*f.grid(), self.grid);
        f.coeffs().iter().zip(&self.phases[i]).map(|(c, (co, s))| c.re * co - c.im * s).sum()
    }
}

use std::fs::{self, File};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Scheme;
use crate::error::{Error, Result};
use crate::spectral::{read_field, write_field, Grid, SpectralField};

/// Position inside a time step at which a right-hand side is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    /// State at node `t_n`.
    Node(usize),
    /// Heun predictor of step `n`, an approximation of the state at `t_{n+1}`.
    Predictor(usize),
}

/// Solution on the uniform grid `t_m = m T / M`, `m = 0..=M`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    t_end: f64,
    scheme: Scheme,
    nodes: Vec<SpectralField>,
    stages: Vec<SpectralField>,
}

impl Trajectory {
    pub(crate) fn from_parts(
        t_end: f64,
        scheme: Scheme,
        nodes: Vec<SpectralField>,
        stages: Vec<SpectralField>,
    ) -> Self {
        debug_assert!(nodes.len() >= 2);
        debug_assert!(stages.is_empty() || stages.len() + 1 == nodes.len());
        Trajectory { t_end, scheme, nodes, stages }
    }

    /// Builds a trajectory by evaluating `f` at every node and stored stage of `like`.
    pub fn map_stages(like: &Trajectory, mut f: impl FnMut(Stage) -> Result<SpectralField>) -> Result<Self> {
        let nodes = (0..like.nodes.len()).map(|n| f(Stage::Node(n))).collect::<Result<_>>()?;
        let stages = (0..like.stages.len()).map(|n| f(Stage::Predictor(n))).collect::<Result<_>>()?;
        Ok(Trajectory { t_end: like.t_end, scheme: like.scheme, nodes, stages })
    }

    /// Zero trajectory on the time grid (and stage layout) of `like`.
    pub fn zeros_like(like: &Trajectory) -> Self {
        let zero = SpectralField::zeros(*like.grid());
        Trajectory {
            t_end: like.t_end,
            scheme: like.scheme,
            nodes: vec![zero.clone(); like.nodes.len()],
            stages: vec![zero; like.stages.len()],
        }
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// Number of steps `M`.
    pub fn steps(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn dt(&self) -> f64 {
        self.t_end / self.steps() as f64
    }

    pub fn time(&self, m: usize) -> f64 {
        m as f64 * self.dt()
    }

    pub fn grid(&self) -> &Grid {
        self.nodes[0].grid()
    }

    pub fn nodes(&self) -> &[SpectralField] {
        &self.nodes
    }

    pub fn node(&self, m: usize) -> &SpectralField {
        &self.nodes[m]
    }

    pub fn final_state(&self) -> &SpectralField {
        self.nodes.last().expect("non-empty trajectory")
    }

    pub fn has_stages(&self) -> bool {
        !self.stages.is_empty()
    }

    /// State used at `stage`; without stored predictors the next node stands in.
    pub fn at_stage(&self, stage: Stage) -> &SpectralField {
        match stage {
            Stage::Node(n) => &self.nodes[n],
            Stage::Predictor(n) => self.stages.get(n).unwrap_or(&self.nodes[n + 1]),
        }
    }

    pub(crate) fn stage_count(&self) -> usize {
        self.nodes.len() + self.stages.len()
    }

    pub(crate) fn stage_slot(&self, stage: Stage) -> usize {
        match stage {
            Stage::Node(n) => n,
            Stage::Predictor(n) if self.has_stages() => self.nodes.len() + n,
            Stage::Predictor(n) => n + 1,
        }
    }

    /// True when both trajectories share `T`, `M` and the grid.
    pub fn same_layout(&self, other: &Trajectory) -> bool {
        self.steps() == other.steps()
            && (self.t_end - other.t_end).abs() <= 1e-14 * self.t_end
            && self.grid() == other.grid()
    }

    pub(crate) fn check_layout(&self, other: &Trajectory) -> Result<()> {
        if !self.same_layout(other) {
            return Err(Error::GridMismatch(format!(
                "trajectories differ: (T={}, M={}, {:?}) vs (T={}, M={}, {:?})",
                self.t_end,
                self.steps(),
                self.grid(),
                other.t_end,
                other.steps(),
                other.grid()
            )));
        }
        Ok(())
    }

    fn zip_with(
        &self,
        other: &Trajectory,
        f: impl Fn(&SpectralField, &SpectralField) -> SpectralField,
    ) -> Result<Self> {
        self.check_layout(other)?;
        let nodes = self.nodes.iter().zip(&other.nodes).map(|(a, b)| f(a, b)).collect();
        let stages = if self.stages.len() == other.stages.len() {
            self.stages.iter().zip(&other.stages).map(|(a, b)| f(a, b)).collect()
        } else {
            Vec::new()
        };
        Ok(Trajectory { t_end: self.t_end, scheme: self.scheme, nodes, stages })
    }

    pub fn add(&self, other: &Trajectory) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Trajectory) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    /// `a * self + b * other`, stage by stage.
    pub fn lincomb(&self, a: f64, other: &Trajectory, b: f64) -> Result<Self> {
        self.zip_with(other, |x, y| &(x * a) + &(y * b))
    }

    pub fn scale(&self, a: f64) -> Self {
        Trajectory {
            t_end: self.t_end,
            scheme: self.scheme,
            nodes: self.nodes.iter().map(|f| f * a).collect(),
            stages: self.stages.iter().map(|f| f * a).collect(),
        }
    }

    /// Every `factor`-th node; stored stages are dropped.
    pub fn subsample(&self, factor: usize) -> Result<Self> {
        if factor == 0 || !self.steps().is_multiple_of(factor) {
            return Err(Error::InvalidArgument(format!("cannot subsample M = {} by {factor}", self.steps())));
        }
        let nodes = self.nodes.iter().step_by(factor).cloned().collect();
        Ok(Trajectory { t_end: self.t_end, scheme: self.scheme, nodes, stages: Vec::new() })
    }

    /// Interval index and fractional position of `t`.
    pub fn locate(&self, t: f64) -> Result<(usize, f64)> {
        let tol = 1e-12 * self.t_end.max(1.0);
        if !(t >= -tol && t <= self.t_end + tol) {
            return Err(Error::TimeOutOfRange { t, t_end: self.t_end });
        }
        let pos = (t / self.dt()).clamp(0.0, self.steps() as f64);
        let n = (pos.floor() as usize).min(self.steps() - 1);
        Ok((n, pos - n as f64))
    }

    /// Field at time `t`, linearly interpolated between nodes.
    pub fn field_at(&self, t: f64) -> Result<SpectralField> {
        let (n, s) = self.locate(t)?;
        Ok(&(&self.nodes[n] * (1.0 - s)) + &(&self.nodes[n + 1] * s))
    }

    /// Point value `u(t, x)`: exact synthesis in space, linear in time.
    pub fn eval(&self, t: f64, x: &[f64]) -> Result<f64> {
        let (n, s) = self.locate(t)?;
        let a = self.nodes[n].eval(x);
        if s == 0.0 {
            return Ok(a);
        }
        Ok((1.0 - s) * a + s * self.nodes[n + 1].eval(x))
    }

    /// `int_0^T <u(t), v(t)>_{L^2} dt` of the piecewise-linear interpolants (exact).
    pub fn inner_l2l2(&self, other: &Trajectory) -> Result<f64> {
        self.check_layout(other)?;
        let dt = self.dt();
        let mut diag_prev = self.nodes[0].inner(&other.nodes[0])?;
        let mut total = 0.0;
        for n in 0..self.steps() {
            let diag_next = self.nodes[n + 1].inner(&other.nodes[n + 1])?;
            let cross = self.nodes[n].inner(&other.nodes[n + 1])? + self.nodes[n + 1].inner(&other.nodes[n])?;
            total += dt * ((diag_prev + diag_next) / 3.0 + cross / 6.0);
            diag_prev = diag_next;
        }
        Ok(total)
    }

    /// `L^2([0,T]; L^2)` norm of the interpolant.
    pub fn norm_l2l2(&self) -> f64 {
        self.inner_l2l2(self).expect("same layout").max(0.0).sqrt()
    }

    /// `max_m |u_m,0 - target|`.
    pub fn max_mass_deviation(&self, target: f64) -> f64 {
        self.nodes.iter().map(|f| (f.mean() - target).abs()).fold(0.0, f64::max)
    }

    pub fn max_conjugate_symmetry_defect(&self) -> f64 {
        self.nodes.iter().chain(&self.stages).map(SpectralField::conjugate_symmetry_defect).fold(0.0, f64::max)
    }
}

/// `manifest.json` of a trajectory directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryManifest {
    #[serde(rename = "T")]
    pub t_end: f64,
    #[serde(rename = "M")]
    pub steps: usize,
    pub scheme: Scheme,
    pub grid: Grid,
    pub node_files: Vec<String>,
}

/// Writes one field file per node plus `manifest.json`. Predictor stages are not stored.
pub fn write_trajectory(traj: &Trajectory, dir: &Path) -> Result<TrajectoryManifest> {
    fs::create_dir_all(dir)?;
    let width = traj.steps().to_string().len().max(4);
    let mut node_files = Vec::with_capacity(traj.nodes.len());
    for (m, node) in traj.nodes.iter().enumerate() {
        let name = format!("node_{m:0width$}.csv");
        write_field(node, &dir.join(&name))?;
        node_files.push(name);
    }
    let manifest = TrajectoryManifest {
        t_end: traj.t_end,
        steps: traj.steps(),
        scheme: traj.scheme,
        grid: *traj.grid(),
        node_files,
    };
    serde_json::to_writer_pretty(File::create(dir.join("manifest.json"))?, &manifest)?;
    Ok(manifest)
}

pub fn read_trajectory(dir: &Path) -> Result<Trajectory> {
    let manifest: TrajectoryManifest = serde_json::from_reader(File::open(dir.join("manifest.json"))?)?;
    if manifest.node_files.len() != manifest.steps + 1 {
        return Err(Error::Parse(format!(
            "manifest lists {} nodes for M = {}",
            manifest.node_files.len(),
            manifest.steps
        )));
    }
    let nodes = manifest
        .node_files
        .iter()
        .map(|name| {
            let field = read_field(&dir.join(name))?;
            let coeffs = field.coeffs().to_vec();
            SpectralField::from_coefficients(manifest.grid, coeffs)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Trajectory::from_parts(manifest.t_end, manifest.scheme, nodes, Vec::new()))
}

use std::fs::File;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward_maps::{solve_mckv, McKVProblem};
use crate::parabolic::Trajectory;
use crate::spectral::{Grid, PointSet};

/// Provenance recorded next to the observations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub n: usize,
    pub d: usize,
    pub t_end: f64,
    pub seed: u64,
    pub noise_std: f64,
    pub truth_id: String,
    pub w0_k_max: usize,
    pub w0: Vec<f64>,
    pub phi_spec: String,
}

/// Observations `Y_i = rho(t_i, X_i) + noise`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub y: Vec<f64>,
    pub t: Vec<f64>,
    pub x: Vec<Vec<f64>>,
    pub meta: DatasetMeta,
}

impl Dataset {
    pub fn new(y: Vec<f64>, t: Vec<f64>, x: Vec<Vec<f64>>, meta: DatasetMeta) -> Result<Self> {
        let n = y.len();
        if n == 0 || t.len() != n || x.len() != n {
            return Err(Error::InvalidArgument(format!(
                "dataset needs N >= 1 matching columns (Y: {}, t: {}, X: {})",
                n,
                t.len(),
                x.len()
            )));
        }
        if let Some(ti) = t.iter().find(|ti| !(**ti >= 0.0 && **ti <= meta.t_end)) {
            return Err(Error::TimeOutOfRange { t: *ti, t_end: meta.t_end });
        }
        if x.iter().any(|p| p.len() != meta.d || p.iter().any(|c| !(*c >= 0.0 && *c < 1.0))) {
            return Err(Error::InvalidArgument("design points must lie in [0,1)^d".into()));
        }
        Ok(Dataset { y, t, x, meta: DatasetMeta { n, ..meta } })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn with_responses(&self, y: Vec<f64>) -> Result<Self> {
        Dataset::new(y, self.t.clone(), self.x.clone(), self.meta.clone())
    }

    /// Writes `path` (CSV: `Y, t, X_1..X_d`) and `path.json` (metadata).
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["Y".to_string(), "t".to_string()];
        header.extend((1..=self.meta.d).map(|j| format!("X_{j}")));
        w.write_record(&header)?;
        for i in 0..self.len() {
            let mut row = vec![format!("{:e}", self.y[i]), format!("{:e}", self.t[i])];
            row.extend(self.x[i].iter().map(|c| format!("{c:e}")));
            w.write_record(&row)?;
        }
        w.flush()?;
        serde_json::to_writer_pretty(File::create(meta_path(path))?, &self.meta)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let meta: DatasetMeta = serde_json::from_reader(File::open(meta_path(path))?)?;
        let mut r = csv::Reader::from_path(path)?;
        let (mut y, mut t, mut x) = (Vec::new(), Vec::new(), Vec::new());
        for rec in r.records() {
            let rec = rec?;
            let vals: Vec<f64> = rec
                .iter()
                .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("{s}: {e}"))))
                .collect::<Result<_>>()?;
            if vals.len() != 2 + meta.d {
                return Err(Error::Parse(format!("expected {} columns, found {}", 2 + meta.d, vals.len())));
            }
            y.push(vals[0]);
            t.push(vals[1]);
            x.push(vals[2..].to_vec());
        }
        Dataset::new(y, t, x, meta)
    }
}

fn meta_path(path: &Path) -> PathBuf {
    let mut p = path.as_os_str().to_owned();
    p.push(".json");
    PathBuf::from(p)
}

/// Evaluation of trajectories at the data locations: interval lookup in time
/// and tabulated Fourier phases in space.
#[derive(Clone, Debug)]
pub struct Design {
    points: PointSet,
    slots: Vec<(usize, f64)>,
    t_end: f64,
    steps: usize,
}

impl Design {
    /// `layout` fixes `T`, `M` and the grid.
    pub fn new(data: &Dataset, layout: &Trajectory) -> Result<Self> {
        let slots = data.t.iter().map(|&t| layout.locate(t)).collect::<Result<_>>()?;
        Ok(Design {
            points: PointSet::new(*layout.grid(), data.x.clone())?,
            slots,
            t_end: layout.t_end(),
            steps: layout.steps(),
        })
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn grid(&self) -> Grid {
        *self.points.grid()
    }

    fn check(&self, traj: &Trajectory) {
        debug_assert!(traj.steps() == self.steps && (traj.t_end() - self.t_end).abs() <= 1e-14 * self.t_end);
    }

    /// `u(t_i, X_i)`.
    pub fn eval(&self, traj: &Trajectory, i: usize) -> f64 {
        self.check(traj);
        let (n, s) = self.slots[i];
        let a = self.points.eval(traj.node(n), i);
        if s == 0.0 {
            a
        } else {
            (1.0 - s) * a + s * self.points.eval(traj.node(n + 1), i)
        }
    }

    pub fn eval_all(&self, traj: &Trajectory) -> Vec<f64> {
        (0..self.len()).map(|i| self.eval(traj, i)).collect()
    }
}

/// Draws `t_i ~ U[0,T]`, `X_i ~ U(T^d)`, `Y_i = rho_{W_0}(t_i, X_i) + noise_std eps_i`.
pub fn generate_data(
    problem: &McKVProblem,
    n: usize,
    noise_std: f64,
    seed: u64,
    phi_spec: &str,
) -> Result<(Dataset, Trajectory)> {
    if !(noise_std >= 0.0) {
        return Err(Error::InvalidArgument(format!("noise_std = {noise_std} must be >= 0")));
    }
    let rho = solve_mckv(problem)?;
    let d = problem.grid().dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Vec::with_capacity(n);
    let mut x = Vec::with_capacity(n);
    let mut eps = Vec::with_capacity(n);
    for _ in 0..n {
        t.push(rng.gen_range(0.0..problem.t_end));
        x.push((0..d).map(|_| rng.gen_range(0.0..1.0)).collect::<Vec<f64>>());
        eps.push(rng.sample::<f64, _>(StandardNormal));
    }
    let meta = DatasetMeta {
        n,
        d,
        t_end: problem.t_end,
        seed,
        noise_std,
        truth_id: format!("W0[K={}]", problem.w.k_max()),
        w0_k_max: problem.w.k_max(),
        w0: problem.w.values().to_vec(),
        phi_spec: phi_spec.to_string(),
    };
    let placeholder = Dataset::new(vec![0.0; n], t, x, meta)?;
    let design = Design::new(&placeholder, &rho)?;
    let y = (0..n).map(|i| design.eval(&rho, i) + noise_std * eps[i]).collect();
    Ok((placeholder.with_responses(y)?, rho))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parabolic::StepperConfig;
    use crate::spectral::{PotentialVec, SpectralField};
    use std::f64::consts::PI;

    fn problem() -> McKVProblem {
        let grid = Grid::new(1, 16).unwrap();
        let phi = SpectralField::from_fn(grid, |x| 1.0 + 0.5 * (2.0 * PI * x[0]).cos());
        let w = PotentialVec::new(2, 1, vec![0.1, -0.2, 0.3, 0.1]).unwrap();
        McKVProblem::new(w, phi, 0.2, StepperConfig::default().with_steps(32)).unwrap()
    }

    #[test]
    fn noiseless_data_hits_the_trajectory() {
        let (data, rho) = generate_data(&problem(), 50, 0.0, 3, "test").unwrap();
        for i in 0..data.len() {
            assert!((data.y[i] - rho.eval(data.t[i], &data.x[i]).unwrap()).abs() < 1e-13);
        }
        let design = Design::new(&data, &rho).unwrap();
        assert_eq!(design.eval_all(&rho), data.y);
    }

    #[test]
    fn generation_is_reproducible() {
        let a = generate_data(&problem(), 20, 1.0, 11, "test").unwrap().0;
        let b = generate_data(&problem(), 20, 1.0, 11, "test").unwrap().0;
        assert_eq!(a, b);
    }

    #[test]
    fn noise_is_centred() {
        let n = 4000;
        let (data, rho) = generate_data(&problem(), n, 1.0, 21, "test").unwrap();
        let design = Design::new(&data, &rho).unwrap();
        let mean: f64 = (0..n).map(|i| data.y[i] - design.eval(&rho, i)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 4.0 / (n as f64).sqrt());
    }

    #[test]
    fn csv_round_trip() {
        let (data, _) = generate_data(&problem(), 10, 0.3, 2, "test").unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.csv");
        data.write(&path).unwrap();
        let back = Dataset::read(&path).unwrap();
        assert_eq!(back.meta, data.meta);
        for i in 0..data.len() {
            assert_eq!(back.y[i], data.y[i]);
            assert_eq!(back.x[i], data.x[i]);
        }
    }

    #[test]
    fn invalid_rows_are_rejected() {
        let meta = generate_data(&problem(), 1, 0.0, 1, "test").unwrap().0.meta;
        assert!(Dataset::new(vec![1.0], vec![0.5], vec![vec![0.2]], meta.clone()).is_err());
        assert!(Dataset::new(vec![1.0], vec![0.1], vec![vec![1.2]], meta.clone()).is_err());
        assert!(Dataset::new(vec![], vec![], vec![], meta).is_err());
    }
}

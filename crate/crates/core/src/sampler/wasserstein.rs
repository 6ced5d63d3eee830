use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

const SLICES: usize = 128;
const SLICE_SEED: u64 = 0x05ee_d0f5_11ce;
const EXACT_LIMIT: usize = 64;

fn check(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<usize> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySamples);
    }
    let d = a[0].len();
    if a.iter().chain(b).any(|x| x.len() != d) {
        return Err(Error::InvalidArgument("samples have inconsistent dimensions".into()));
    }
    Ok(d)
}

fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Squared `W_2` between two empirical measures on the line, by integrating
/// the squared difference of the quantile functions. Counts may differ.
pub fn w2_squared_1d(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySamples);
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    if a.len() == b.len() {
        return Ok(a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64);
    }
    let (na, nb) = (a.len(), b.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut u = 0.0;
    let mut total = 0.0;
    while i < na && j < nb {
        let next_a = (i + 1) as f64 / na as f64;
        let next_b = (j + 1) as f64 / nb as f64;
        let next = next_a.min(next_b);
        total += (next - u) * (a[i] - b[j]) * (a[i] - b[j]);
        u = next;
        if next_a <= next {
            i += 1;
        }
        if next_b <= next {
            j += 1;
        }
    }
    Ok(total)
}

/// Minimum-cost perfect matching for a square cost matrix (Hungarian method).
/// Returns `assignment[row] = column`.
pub fn min_cost_assignment(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    // potentials and matching, 1-based with a virtual column 0
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for j in 1..=n {
        assignment[p[j] - 1] = j - 1;
    }
    assignment
}

/// Exact squared `W_2` between equal-size empirical measures via optimal assignment.
pub fn w2_squared_assignment(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<f64> {
    check(a, b)?;
    if a.len() != b.len() {
        return Err(Error::InvalidArgument("assignment path needs equal sample counts".into()));
    }
    let cost: Vec<Vec<f64>> = a.iter().map(|x| b.iter().map(|y| sq_dist(x, y)).collect()).collect();
    let assignment = min_cost_assignment(&cost);
    let total: f64 = assignment.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
    Ok(total / a.len() as f64)
}

/// Sliced squared `W_2`: average of 1-D values over fixed random directions.
pub fn w2_squared_sliced(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<f64> {
    let d = check(a, b)?;
    let mut rng = ChaCha8Rng::seed_from_u64(SLICE_SEED);
    let mut total = 0.0;
    for _ in 0..SLICES {
        let mut dir: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
        let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
        dir.iter_mut().for_each(|x| *x /= norm);
        let proj =
            |s: &[Vec<f64>]| -> Vec<f64> { s.iter().map(|x| x.iter().zip(&dir).map(|(a, b)| a * b).sum()).collect() };
        total += w2_squared_1d(&proj(a), &proj(b))?;
    }
    Ok(total / SLICES as f64)
}

/// Squared `W_2` diagnostic: exact quantile formula in 1-D, exact assignment
/// for equal counts up to 64, sliced estimate otherwise.
pub fn w2_diagnostics(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<f64> {
    let d = check(a, b)?;
    if d == 1 {
        let flat = |s: &[Vec<f64>]| -> Vec<f64> { s.iter().map(|x| x[0]).collect() };
        return w2_squared_1d(&flat(a), &flat(b));
    }
    if a.len() == b.len() && a.len() <= EXACT_LIMIT {
        return w2_squared_assignment(a, b);
    }
    w2_squared_sliced(a, b)
}

//! Multi-dimensional complex FFTs on `n^d` row-major arrays.
//!
//! Plans are cached per thread so the spectral operators can stay free
//! functions with value semantics.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

type Plans = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

thread_local! {
    static PLANS: RefCell<(FftPlanner<f64>, HashMap<usize, Plans>)> =
        RefCell::new((FftPlanner::new(), HashMap::new()));
}

fn plans(n: usize) -> Plans {
    PLANS.with(|cell| {
        let mut guard = cell.borrow_mut();
        let (planner, cache) = &mut *guard;
        cache.entry(n).or_insert_with(|| (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))).clone()
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Direction {
    /// `X_k = sum_j x_j e^{-2 pi i k j / n}` (unnormalised).
    Forward,
    /// `x_j = sum_k X_k e^{+2 pi i k j / n}` (unnormalised).
    Inverse,
}

/// In-place transform of an `n^d` array along every axis.
pub(crate) fn transform(data: &mut [Complex64], n: usize, d: usize, dir: Direction) {
    debug_assert_eq!(data.len(), n.pow(d as u32));
    let (fwd, inv) = plans(n);
    let plan = match dir {
        Direction::Forward => fwd,
        Direction::Inverse => inv,
    };
    let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
    if d == 1 {
        plan.process_with_scratch(data, &mut scratch);
        return;
    }
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for axis in 0..d {
        let stride = n.pow((d - 1 - axis) as u32);
        let block = stride * n;
        for outer in (0..data.len()).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                for (j, slot) in line.iter_mut().enumerate() {
                    *slot = data[base + j * stride];
                }
                plan.process_with_scratch(&mut line, &mut scratch);
                for (j, value) in line.iter().enumerate() {
                    data[base + j * stride] = *value;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_forward_is_identity_up_to_scale() {
        let n = 6;
        let d = 2;
        let original: Vec<Complex64> =
            (0..n * n).map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.3).cos())).collect();
        let mut data = original.clone();
        transform(&mut data, n, d, Direction::Forward);
        transform(&mut data, n, d, Direction::Inverse);
        let scale = (n * n) as f64;
        for (a, b) in data.iter().zip(&original) {
            assert!((a / scale - b).norm() < 1e-13);
        }
    }
}

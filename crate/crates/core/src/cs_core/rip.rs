use nalgebra::DMatrix;
use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use super::matrix::MeasurementMatrix;
use crate::error::{invalid, Result};
use crate::rng::rng_from_seed;

/// Enumerate every k-subset when there are at most this many.
pub const EXHAUSTIVE_CAP: u128 = 100_000;

/// Sampled estimate of the restricted isometry constant.
///
/// This is always a lower bound on the true constant: a subset that was
/// never sampled can only make the constant larger.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RipEstimate {
    pub delta_hat: f64,
    pub k: usize,
    pub num_samples: usize,
    pub exhaustive: bool,
    pub is_lower_bound: bool,
    pub worst_subset: Vec<usize>,
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u128::MAX / (n as u128 + 1) {
            return u128::MAX;
        }
    }
    acc
}

/// Lexicographic iterator over k-subsets of `0..n`.
#[derive(Debug, Clone)]
pub struct Combinations {
    n: usize,
    cur: Vec<usize>,
    done: bool,
}

impl Combinations {
    pub fn new(n: usize, k: usize) -> Self {
        Self {
            n,
            cur: (0..k).collect(),
            done: k > n,
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.cur.clone();
        let k = self.cur.len();
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.cur[i] < self.n - k + i {
                self.cur[i] += 1;
                for j in i + 1..k {
                    self.cur[j] = self.cur[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

/// The column subsets that [`estimate_rip_constant`] evaluates: every
/// k-subset in lexicographic order when `C(n, k) <= EXHAUSTIVE_CAP`,
/// otherwise `num_samples` uniformly random k-subsets (sorted, possibly
/// repeating) drawn from `seed`.
pub fn rip_subsets(n: usize, k: usize, num_samples: usize, seed: u64) -> (Vec<Vec<usize>>, bool) {
    if binomial(n, k) <= EXHAUSTIVE_CAP {
        return (Combinations::new(n, k).collect(), true);
    }
    let mut rng = rng_from_seed(seed);
    let subsets = (0..num_samples)
        .map(|_| {
            let mut s = sample(&mut rng, n, k).into_vec();
            s.sort_unstable();
            s
        })
        .collect();
    (subsets, false)
}

/// `max(sigma_max^2 - 1, 1 - sigma_min^2)` for one column submatrix.
pub fn subset_deviation(sub: &DMatrix<f64>) -> f64 {
    let (m, k) = sub.shape();
    let sv = sub.singular_values();
    let smax = sv.max();
    let smin = if k > m { 0.0 } else { sv.min() };
    (smax * smax - 1.0).max(1.0 - smin * smin)
}

pub fn estimate_rip_constant(
    phi: &MeasurementMatrix,
    k: usize,
    num_samples: usize,
    seed: u64,
) -> Result<RipEstimate> {
    if k == 0 || k > phi.cols() {
        return Err(invalid("k", format!("need 1 <= k <= {}, got {k}", phi.cols())));
    }
    if num_samples == 0 {
        return Err(invalid("num_samples", "must be at least 1"));
    }
    let (subsets, exhaustive) = rip_subsets(phi.cols(), k, num_samples, seed);
    let mut delta_hat = f64::NEG_INFINITY;
    let mut worst = Vec::new();
    for s in &subsets {
        let d = subset_deviation(&phi.column_submatrix(s));
        if d > delta_hat {
            delta_hat = d;
            worst.clone_from(s);
        }
    }
    Ok(RipEstimate {
        delta_hat: delta_hat.max(0.0),
        k,
        num_samples: subsets.len(),
        exhaustive,
        is_lower_bound: true,
        worst_subset: worst,
    })
}

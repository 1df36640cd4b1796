use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng::rng_from_seed;

/// A length-n real vector with few nonzero coordinates.
///
/// Storage is dense; the support is every coordinate that is exactly
/// nonzero. Solver output, which carries round-off, is thresholded with
/// [`SparseVector::support_with_tol`] instead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    values: Vec<f64>,
}

impl SparseVector {
    pub fn zeros(n: usize) -> Self {
        Self { values: vec![0.0; n] }
    }

    pub fn from_dense(values: Vec<f64>) -> Self {
        Self { values }
    }

    /// Build from `(index, value)` pairs. Later pairs overwrite earlier ones.
    pub fn from_entries(n: usize, entries: &[(usize, f64)]) -> Result<Self> {
        let mut values = vec![0.0; n];
        for &(i, v) in entries {
            if i >= n {
                return Err(crate::Error::OutOfRange { index: i, len: n });
            }
            values[i] = v;
        }
        Ok(Self { values })
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

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn support(&self) -> Vec<usize> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, _)| i)
            .collect()
    }

    /// Support after discarding coordinates with `|x_i| < tol * max(1, ||x||_inf)`.
    pub fn support_with_tol(&self, tol: f64) -> Vec<usize> {
        let cut = tol * self.norm_inf().max(1.0);
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.abs() >= cut)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn sparsity(&self) -> usize {
        self.values.iter().filter(|v| **v != 0.0).count()
    }

    /// Ratio of nonzeros to length.
    pub fn sparsity_ratio(&self) -> f64 {
        if self.values.is_empty() {
            0.0
        } else {
            self.sparsity() as f64 / self.values.len() as f64
        }
    }

    pub fn is_k_sparse(&self, k: usize) -> bool {
        self.sparsity() <= k
    }

    pub fn norm_l1(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum()
    }

    pub fn norm_l2(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |a, v| a.max(v.abs()))
    }

    /// Largest coordinate-wise absolute difference.
    pub fn max_abs_diff(&self, other: &SparseVector) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0_f64, |a, (x, y)| a.max((x - y).abs()))
    }
}

/// How the support of a generated signal is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SupportLaw {
    /// A uniformly random subset of exactly `k` coordinates.
    FixedK(usize),
    /// Every coordinate is nonzero independently with this probability.
    Bernoulli(f64),
}

/// Distribution of the nonzero values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ValueLaw {
    /// Uniform on `{1, ..., levels}`; `levels = 2^R` for a per-symbol rate R.
    UniformInteger { levels: u32 },
    /// Zero-mean gaussian with the given variance.
    Gaussian { variance: f64 },
}

impl ValueLaw {
    pub(crate) fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            ValueLaw::UniformInteger { levels } => f64::from(rng.random_range(1..=levels)),
            ValueLaw::Gaussian { variance } => {
                let d = Normal::new(0.0, variance.sqrt()).expect("finite variance");
                loop {
                    let v = d.sample(rng);
                    if v != 0.0 {
                        break v;
                    }
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            ValueLaw::UniformInteger { levels } if levels == 0 => {
                Err(invalid("levels", "must be at least 1"))
            }
            ValueLaw::Gaussian { variance } if !(variance > 0.0 && variance.is_finite()) => {
                Err(invalid("variance", "must be positive and finite"))
            }
            _ => Ok(()),
        }
    }
}

/// Draw a sparse signal of length `n`. Pure in `(n, support, values, seed)`.
/// Noise vector of exactly L2 norm `radius`, uniform in direction.
pub fn bounded_noise(len: usize, radius: f64, seed: u64) -> Vec<f64> {
    let mut rng = rng_from_seed(seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let v: Vec<f64> = (0..len).map(|_| normal.sample(&mut rng)).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return v;
    }
    v.into_iter().map(|x| x * radius / norm).collect()
}

pub fn generate_sparse_signal(
    n: usize,
    support: SupportLaw,
    values: ValueLaw,
    seed: u64,
) -> Result<SparseVector> {
    let mut rng = rng_from_seed(seed);
    generate_with_rng(n, support, values, &mut rng)
}

pub(crate) fn generate_with_rng<R: Rng + ?Sized>(
    n: usize,
    support: SupportLaw,
    values: ValueLaw,
    rng: &mut R,
) -> Result<SparseVector> {
    values.validate()?;
    let mut x = vec![0.0; n];
    match support {
        SupportLaw::FixedK(k) => {
            if k > n {
                return Err(invalid("k", format!("k = {k} exceeds n = {n}")));
            }
            let mut idx = sample(rng, n, k).into_vec();
            idx.sort_unstable();
            for i in idx {
                x[i] = values.draw(rng);
            }
        }
        SupportLaw::Bernoulli(alpha) => {
            if !(0.0..=1.0).contains(&alpha) {
                return Err(invalid("alpha", "must lie in [0, 1]"));
            }
            for xi in x.iter_mut() {
                if rng.random_bool(alpha) {
                    *xi = values.draw(rng);
                }
            }
        }
    }
    Ok(SparseVector::from_dense(x))
}

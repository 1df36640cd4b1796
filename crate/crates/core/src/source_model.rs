//! k-sparsely correlated sources.
//!
//! The sources' message vector at time `t` is `mu_t = Phi mu'_t` with a
//! fixed nonsingular `n x n` transform `Phi` and a sparse latent vector
//! `mu'_t` whose nonzeros are uniform on `{1, ..., 2^R}`.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cs_core::{
    binomial, generate_with_rng, hb, MatrixKind, MeasurementMatrix, SparseVector, SupportLaw,
    ValueLaw,
};
use crate::error::{invalid, Error, Result};
use crate::rng::{derive_seed, rng_for};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SourceMode {
    /// Exactly `k` nonzeros at a uniformly random support.
    FixedK,
    /// Each latent coordinate nonzero independently with probability `alpha`.
    BernoulliSupport,
}

#[derive(Debug, Clone)]
pub struct SourceEnsemble {
    n: usize,
    k: usize,
    alpha: f64,
    transform: MeasurementMatrix,
    symbol_rate: u32,
    mode: SourceMode,
}

impl SourceEnsemble {
    pub fn new(
        k: usize,
        alpha: f64,
        transform: MeasurementMatrix,
        symbol_rate: u32,
        mode: SourceMode,
    ) -> Result<Self> {
        let n = transform.rows();
        if transform.cols() != n {
            return Err(invalid("transform", "must be square"));
        }
        if !(0.0..1.0).contains(&alpha) {
            return Err(invalid("alpha", format!("{alpha} outside [0, 1)")));
        }
        if k > n {
            return Err(invalid("k", format!("k = {k} exceeds n = {n}")));
        }
        if !(1..=20).contains(&symbol_rate) {
            return Err(invalid("symbol_rate", "R must lie in 1..=20"));
        }
        if !is_nonsingular(&transform) {
            return Err(invalid("transform", "must be nonsingular"));
        }
        Ok(Self {
            n,
            k,
            alpha,
            transform,
            symbol_rate,
            mode,
        })
    }

    /// The random-sign ensemble: an `n x n` transform with entries
    /// `±1/sqrt(m)`, redrawn until nonsingular.
    pub fn random_sign(
        n: usize,
        k: usize,
        m: usize,
        symbol_rate: u32,
        mode: SourceMode,
        alpha: Option<f64>,
        seed: u64,
    ) -> Result<Self> {
        if m == 0 || m > n {
            return Err(invalid("m", format!("need 1 <= m <= n, got {m}")));
        }
        let alpha = match mode {
            SourceMode::FixedK => k as f64 / n as f64,
            SourceMode::BernoulliSupport => alpha.unwrap_or(k as f64 / n as f64),
        };
        let scale = 1.0 / (m as f64).sqrt();
        for attempt in 0..64 {
            let phi = MeasurementMatrix::bernoulli_scaled(
                n,
                n,
                scale,
                derive_seed(seed, "transform", attempt),
            );
            if is_nonsingular(&phi) {
                return Self::new(k, alpha, phi, symbol_rate, mode);
            }
        }
        Err(invalid("transform", "no nonsingular draw in 64 attempts"))
    }

    /// Fixed-support ensemble over [`harmonic_transform`]; any two of its
    /// first rows recover every 1-sparse latent by L1 minimisation.
    pub fn harmonic(n: usize, symbol_rate: u32) -> Result<Self> {
        Self::new(
            1,
            1.0 / n as f64,
            harmonic_transform(n)?,
            symbol_rate,
            SourceMode::FixedK,
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn k(&self) -> usize {
        self.k
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn transform(&self) -> &MeasurementMatrix {
        &self.transform
    }
    pub fn symbol_rate(&self) -> u32 {
        self.symbol_rate
    }
    pub fn mode(&self) -> SourceMode {
        self.mode
    }
    pub fn levels(&self) -> u32 {
        1 << self.symbol_rate
    }

    /// Largest number of latent nonzeros a sample can have.
    pub fn max_nonzeros(&self) -> usize {
        match self.mode {
            SourceMode::FixedK => self.k,
            SourceMode::BernoulliSupport => self.n,
        }
    }

    fn support_law(&self) -> SupportLaw {
        match self.mode {
            SourceMode::FixedK => SupportLaw::FixedK(self.k),
            SourceMode::BernoulliSupport => SupportLaw::Bernoulli(self.alpha),
        }
    }

    fn draw_latent<R: Rng + ?Sized>(&self, rng: &mut R) -> SparseVector {
        let values = ValueLaw::UniformInteger {
            levels: self.levels(),
        };
        generate_with_rng(self.n, self.support_law(), values, rng).expect("validated ensemble")
    }
}

/// Deterministic `n x n` transform sampled at angles `theta_j = j pi / n`.
///
/// Rows 0 and 1 are `cos theta_j` and `sin theta_j`: unit columns pointing
/// in distinct directions, so the 2-row submatrix recovers 1-sparse
/// nonnegative vectors exactly. Remaining rows are the constant row and
/// higher harmonics `cos(l theta), sin(l theta)`, `l = 2, 3, ...`.
pub fn harmonic_transform(n: usize) -> Result<MeasurementMatrix> {
    if n < 2 {
        return Err(invalid("n", "harmonic transform needs n >= 2"));
    }
    let theta = |j: usize| j as f64 * std::f64::consts::PI / n as f64;
    let mut rows: Vec<Vec<f64>> = vec![
        (0..n).map(|j| theta(j).cos()).collect(),
        (0..n).map(|j| theta(j).sin()).collect(),
        vec![1.0; n],
    ];
    let mut l = 2.0;
    while rows.len() < n {
        rows.push((0..n).map(|j| (l * theta(j)).cos()).collect());
        rows.push((0..n).map(|j| (l * theta(j)).sin()).collect());
        l += 1.0;
    }
    rows.truncate(n);
    let phi = MeasurementMatrix::from_rows(&rows)?;
    if !is_nonsingular(&phi) {
        return Err(invalid("n", format!("harmonic transform singular at n = {n}")));
    }
    Ok(phi)
}

fn is_nonsingular(phi: &MeasurementMatrix) -> bool {
    if phi.kind() == MatrixKind::Identity {
        return true;
    }
    let sv = phi.as_dmatrix().singular_values();
    let smax = sv.max();
    smax > 0.0 && sv.min() > 1e-10 * smax
}

/// Latent and observed message vectors at one time index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MessagePair {
    pub latent: SparseVector,
    pub observed: Vec<f64>,
    pub t: u64,
}

/// Draw `(mu'_t, mu_t)`; pure in `(seed, t)`.
pub fn sample_messages(ens: &SourceEnsemble, t: u64, seed: u64) -> MessagePair {
    let mut rng = rng_for(seed, "messages", t);
    let latent = ens.draw_latent(&mut rng);
    let observed = ens.transform.apply(latent.values()).expect("square transform");
    MessagePair {
        latent,
        observed,
        t,
    }
}

/// Closed-form entropy accounting, in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    /// `n H_b(alpha) + k (R + 1)`.
    pub joint: f64,
    /// `n H_b(alpha) + k R`, the approximation stated next to `joint`.
    pub joint_approx: f64,
    /// `R + log2(k) / 2`, assumed equal for every source.
    pub per_source: f64,
    /// Joint entropy of any `m` sources; equals `joint`.
    pub subset_m: f64,
    pub sum_active: f64,
    pub sum_all: f64,
    /// Exact joint entropy of the latent law (see [`exact_joint_entropy`]).
    pub exact_joint: f64,
}

impl EntropyReport {
    /// Violated links of the chain `joint <= sum_all`, `subset_m == joint`,
    /// `subset_m <= sum_active <= sum_all`.
    pub fn ordering_violations(&self) -> Vec<&'static str> {
        let tol = 1e-9 * self.sum_all.abs().max(1.0);
        let mut v = Vec::new();
        if self.joint > self.sum_all + tol {
            v.push("joint > sum_all");
        }
        if (self.subset_m - self.joint).abs() > tol {
            v.push("subset_m != joint");
        }
        if self.subset_m > self.sum_active + tol {
            v.push("subset_m > sum_active");
        }
        if self.sum_active > self.sum_all + tol {
            v.push("sum_active > sum_all");
        }
        v
    }
}

pub fn analytic_entropies(ens: &SourceEnsemble, m: usize) -> Result<EntropyReport> {
    if m == 0 || m > ens.n {
        return Err(invalid("m", format!("need 1 <= m <= n, got {m}")));
    }
    let n = ens.n as f64;
    let k = ens.k as f64;
    let r = f64::from(ens.symbol_rate);
    let base = n * hb(ens.alpha);
    let joint = base + k * (r + 1.0);
    let per_source = r + if ens.k > 0 { 0.5 * k.log2() } else { 0.0 };
    Ok(EntropyReport {
        joint,
        joint_approx: base + k * r,
        per_source,
        subset_m: joint,
        sum_active: m as f64 * per_source,
        sum_all: n * per_source,
        exact_joint: exact_joint_entropy(ens),
    })
}

/// Exact entropy of the latent vector in bits.
///
/// Bernoulli-support mode has independent coordinates, each with entropy
/// `H_b(alpha) + alpha R`. Fixed-k mode is a uniform support choice times
/// `k` independent uniform values: `log2 C(n, k) + k R`.
pub fn exact_joint_entropy(ens: &SourceEnsemble) -> f64 {
    let r = f64::from(ens.symbol_rate);
    match ens.mode {
        SourceMode::BernoulliSupport => ens.n as f64 * (hb(ens.alpha) + ens.alpha * r),
        SourceMode::FixedK => log2_binomial(ens.n, ens.k) + ens.k as f64 * r,
    }
}

fn log2_binomial(n: usize, k: usize) -> f64 {
    let c = binomial(n, k);
    if c < (1u128 << 100) {
        return (c as f64).log2();
    }
    (0..k).map(|i| ((n - i) as f64 / (i + 1) as f64).log2()).sum()
}

/// Exact entropy of source `i`'s message `M_i = sum_j Phi_ij mu'_j`.
///
/// Only defined for random-sign transforms (every entry `±c`), where the
/// law of `M_i / c` is an integer convolution. Returns `None` otherwise or
/// when the support of the law exceeds 10^7 points.
pub fn exact_source_entropy(ens: &SourceEnsemble, i: usize) -> Option<f64> {
    if ens.transform.kind() != MatrixKind::Bernoulli || i >= ens.n {
        return None;
    }
    let levels = ens.levels() as usize;
    if ens.max_nonzeros() * levels > 10_000_000 {
        return None;
    }
    let plus = (0..ens.n).filter(|&j| ens.transform.get(i, j) > 0.0).count();
    let minus = ens.n - plus;
    let pmf = match ens.mode {
        SourceMode::BernoulliSupport => {
            let mut f = vec![ens.alpha / levels as f64; levels + 1];
            f[0] = 1.0 - ens.alpha;
            let pos = conv_power(&f, plus);
            let neg = conv_power(&f, minus);
            signed_sum(&pos, &neg)
        }
        SourceMode::FixedK => {
            let mut u = vec![1.0 / levels as f64; levels + 1];
            u[0] = 0.0;
            let total = binomial(ens.n, ens.k) as f64;
            let mut acc: Vec<f64> = Vec::new();
            let off_total = ens.k * levels;
            acc.resize(2 * off_total + 1, 0.0);
            for a in 0..=ens.k.min(plus) {
                if ens.k - a > minus {
                    continue;
                }
                let w = binomial(plus, a) as f64 * binomial(minus, ens.k - a) as f64 / total;
                if w == 0.0 {
                    continue;
                }
                let d = signed_sum(&conv_power(&u, a), &conv_power(&u, ens.k - a));
                // d is indexed from -(k - a) * levels
                let shift = off_total - (ens.k - a) * levels;
                for (idx, p) in d.iter().enumerate() {
                    acc[shift + idx] += w * p;
                }
            }
            acc
        }
    };
    Some(crate::cs_core::shannon_entropy(&pmf))
}

fn conv(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if *x == 0.0 {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn conv_power(f: &[f64], times: usize) -> Vec<f64> {
    let mut acc = vec![1.0];
    for _ in 0..times {
        acc = conv(&acc, f);
    }
    acc
}

/// Law of `P - N` for independent nonnegative integer laws `pos`, `neg`,
/// indexed from `-(neg.len() - 1)`.
fn signed_sum(pos: &[f64], neg: &[f64]) -> Vec<f64> {
    let rev: Vec<f64> = neg.iter().rev().copied().collect();
    conv(pos, &rev)
}

/// Plug-in (empirical frequency) entropy of the latent vector, in bits.
///
/// Entropy is invariant under the fixed invertible transform, so the
/// discrete latent vector is counted instead of the real-valued messages.
pub fn plugin_joint_entropy(ens: &SourceEnsemble, num_samples: usize, seed: u64) -> Result<f64> {
    if ens.n > 10 || ens.symbol_rate > 3 {
        return Err(Error::CapExceeded {
            count: (u128::from(ens.levels()) + 1).pow(ens.n as u32),
            cap: 9u128.pow(10),
        });
    }
    if num_samples < 10_000 {
        return Err(invalid("num_samples", "need at least 10^4 samples"));
    }
    let base = u64::from(ens.levels()) + 1;
    let mut rng = rng_for(seed, "plugin-entropy", 0);
    let mut counts: HashMap<u64, u64> = HashMap::new();
    for _ in 0..num_samples {
        let x = ens.draw_latent(&mut rng);
        let key = x.values().iter().fold(0u64, |acc, v| acc * base + *v as u64);
        *counts.entry(key).or_default() += 1;
    }
    let total = num_samples as f64;
    let mut h = 0.0;
    for c in counts.values() {
        let p = *c as f64 / total;
        h -= p * p.log2();
    }
    Ok(h)
}

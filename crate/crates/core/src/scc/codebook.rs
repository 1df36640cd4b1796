//! Random sparse codebooks, power-checked encoding and the AWGN channel.

use std::collections::HashMap;

use rand::seq::index::sample;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::analysis::ChannelConfig;
use crate::cs_core::{estimate_rip_constant, DimensionPlan, MeasurementMatrix, SparseVector};
use crate::error::{invalid, Error, Result};
use crate::rng::{derive_seed, rng_for};

/// Largest codebook, in bits (`2^20` codewords).
pub const MAX_CODEBOOK_BITS: u32 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CodebookConfig {
    /// Subsets sampled for the `delta_k` estimate used in the variance.
    pub rip_samples: usize,
    /// Subsets sampled for each of `delta_3k`, `delta_4k`; 0 skips the check.
    pub regime_samples: usize,
    /// Turn a failed `delta_3k + 3 delta_4k < 2` check into an error.
    pub strict_regime: bool,
    /// Use this `delta_k` instead of estimating it.
    pub delta_k: Option<f64>,
}

impl Default for CodebookConfig {
    fn default() -> Self {
        Self {
            rip_samples: 500,
            regime_samples: 50,
            strict_regime: false,
            delta_k: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RipRegime {
    pub delta_3k: f64,
    pub delta_4k: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone)]
pub struct SccCodebook {
    m: usize,
    n: usize,
    k: usize,
    requested_rate: f64,
    bits: u32,
    phi: MeasurementMatrix,
    delta_k: f64,
    power: f64,
    variance: f64,
    supports: Vec<Vec<usize>>,
    values: Vec<Vec<f64>>,
    encoded: Vec<Vec<f64>>,
    by_support: HashMap<Vec<usize>, Vec<usize>>,
    power_violations: usize,
    regime: Option<RipRegime>,
    seed: u64,
}

/// Channel input for one message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Encoded {
    pub w: Vec<f64>,
    /// `||w||^2 / m`.
    pub power: f64,
    pub violates_power: bool,
}

/// Codeword count exponent `ceil(m R)`.
pub fn codebook_bits(m: usize, rate: f64) -> Result<u32> {
    if !(rate >= 0.0 && rate.is_finite()) {
        return Err(invalid("rate", format!("{rate} must be finite and >= 0")));
    }
    let raw = (m as f64 * rate - 1e-9).ceil().max(0.0);
    if raw > MAX_CODEBOOK_BITS as f64 {
        return Err(Error::CapExceeded {
            count: 1u128 << (raw.min(127.0) as u32),
            cap: 1u128 << MAX_CODEBOOK_BITS,
        });
    }
    Ok(raw as u32)
}

/// Draws `2^ceil(mR)` codewords: uniformly random `k`-subsets carrying
/// i.i.d. `N(0, m P / (k (1 + delta_k)))` values, sent as `W = Phi X` with a
/// random-sign `m x n` matrix.
pub fn build_codebook(
    plan: &DimensionPlan,
    ch: &ChannelConfig,
    rate: f64,
    seed: u64,
    cfg: &CodebookConfig,
) -> Result<SccCodebook> {
    let (m, n, k) = (plan.m, plan.n, plan.k);
    if k == 0 || k > m || m > n {
        return Err(invalid("plan", format!("need 1 <= k <= m <= n, got k={k} m={m} n={n}")));
    }
    let bits = codebook_bits(m, rate)?;
    let phi = MeasurementMatrix::bernoulli(m, n, derive_seed(seed, "phi", 0))?;
    let delta_k = match cfg.delta_k {
        Some(d) if d >= 0.0 && d.is_finite() => d,
        Some(d) => return Err(invalid("delta_k", format!("{d} must be finite and >= 0"))),
        None if cfg.rip_samples == 0 => 0.0,
        None => {
            estimate_rip_constant(&phi, k, cfg.rip_samples, derive_seed(seed, "rip", k as u64))?
                .delta_hat
        }
    };
    let regime = if cfg.regime_samples == 0 {
        None
    } else {
        let est = |kk: usize| -> Result<f64> {
            let kk = kk.min(n);
            Ok(estimate_rip_constant(
                &phi,
                kk,
                cfg.regime_samples,
                derive_seed(seed, "rip", kk as u64),
            )?
            .delta_hat)
        };
        let (d3, d4) = (est(3 * k)?, est(4 * k)?);
        Some(RipRegime {
            delta_3k: d3,
            delta_4k: d4,
            satisfied: d3 + 3.0 * d4 < 2.0,
        })
    };
    if cfg.strict_regime {
        if let Some(r) = regime.filter(|r| !r.satisfied) {
            return Err(Error::RipRegime(format!(
                "delta_3k + 3 delta_4k = {:.3} >= 2",
                r.delta_3k + 3.0 * r.delta_4k
            )));
        }
    }

    let variance = m as f64 * ch.power / (k as f64 * (1.0 + delta_k));
    let normal = Normal::new(0.0, variance.sqrt()).map_err(|e| invalid("variance", e.to_string()))?;
    let mut rng = rng_for(seed, "codebook", 0);
    let count = 1usize << bits;
    let mut cb = SccCodebook {
        m,
        n,
        k,
        requested_rate: rate,
        bits,
        phi,
        delta_k,
        power: ch.power,
        variance,
        supports: Vec::with_capacity(count),
        values: Vec::with_capacity(count),
        encoded: Vec::with_capacity(count),
        by_support: HashMap::new(),
        power_violations: 0,
        regime,
        seed,
    };
    for i in 0..count {
        let mut support = sample(&mut rng, n, k).into_vec();
        support.sort_unstable();
        let values: Vec<f64> = (0..k).map(|_| normal.sample(&mut rng)).collect();
        let enc = cb.encode_parts(&support, &values);
        cb.power_violations += enc.violates_power as usize;
        cb.by_support.entry(support.clone()).or_default().push(i);
        cb.supports.push(support);
        cb.values.push(values);
        cb.encoded.push(enc.w);
    }
    Ok(cb)
}

impl SccCodebook {
    pub fn m(&self) -> usize {
        self.m
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn k(&self) -> usize {
        self.k
    }
    pub fn len(&self) -> usize {
        self.supports.len()
    }
    pub fn is_empty(&self) -> bool {
        self.supports.is_empty()
    }
    /// `log2(len) = ceil(m R)`.
    pub fn bits(&self) -> u32 {
        self.bits
    }
    pub fn requested_rate(&self) -> f64 {
        self.requested_rate
    }
    /// Effective rate `ceil(m R) / m`.
    pub fn rate(&self) -> f64 {
        self.bits as f64 / self.m as f64
    }
    pub fn phi(&self) -> &MeasurementMatrix {
        &self.phi
    }
    pub fn delta_k(&self) -> f64 {
        self.delta_k
    }
    pub fn power(&self) -> f64 {
        self.power
    }
    /// Variance of each codeword nonzero.
    pub fn nonzero_variance(&self) -> f64 {
        self.variance
    }
    pub fn regime(&self) -> Option<RipRegime> {
        self.regime
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }
    /// Number of codewords whose channel input exceeds the power budget.
    pub fn power_violations(&self) -> usize {
        self.power_violations
    }
    pub fn power_violation_rate(&self) -> f64 {
        self.power_violations as f64 / self.len() as f64
    }

    pub fn support(&self, i: usize) -> &[usize] {
        &self.supports[i]
    }

    pub fn codeword(&self, i: usize) -> Result<SparseVector> {
        self.check(i)?;
        let entries: Vec<(usize, f64)> = self.supports[i]
            .iter()
            .copied()
            .zip(self.values[i].iter().copied())
            .collect();
        SparseVector::from_entries(self.n, &entries)
    }

    /// Stored channel input `Phi X_i`.
    pub(crate) fn channel_input(&self, i: usize) -> &[f64] {
        &self.encoded[i]
    }

    /// Codeword indices grouped by support.
    pub(crate) fn by_support(&self) -> &HashMap<Vec<usize>, Vec<usize>> {
        &self.by_support
    }

    fn check(&self, i: usize) -> Result<()> {
        if i >= self.len() {
            return Err(Error::OutOfRange {
                index: i,
                len: self.len(),
            });
        }
        Ok(())
    }

    /// `W_i = Phi X_i`, flagged if it breaks the power budget.
    pub fn encode(&self, i: usize) -> Result<Encoded> {
        self.check(i)?;
        Ok(self.encode_parts(&self.supports[i], &self.values[i]))
    }

    /// Encodes an arbitrary length-`n` vector with the codebook's matrix.
    pub fn encode_vector(&self, x: &SparseVector) -> Result<Encoded> {
        let w = self.phi.apply(x.values())?;
        Ok(self.finish(w))
    }

    fn encode_parts(&self, support: &[usize], values: &[f64]) -> Encoded {
        let a = self.phi.as_dmatrix();
        let w = (0..self.m)
            .map(|r| support.iter().zip(values).map(|(&j, v)| a[(r, j)] * v).sum())
            .collect();
        self.finish(w)
    }

    fn finish(&self, w: Vec<f64>) -> Encoded {
        let power = w.iter().map(|v| v * v).sum::<f64>() / self.m as f64;
        Encoded {
            violates_power: power > self.power,
            power,
            w,
        }
    }
}

/// Adds i.i.d. `N(0, N)` noise.
pub fn awgn(w: &[f64], ch: &ChannelConfig, seed: u64) -> Vec<f64> {
    let mut rng = rng_for(seed, "awgn", 0);
    let normal = Normal::new(0.0, ch.noise.sqrt()).expect("validated noise");
    w.iter().map(|v| v + normal.sample(&mut rng)).collect()
}

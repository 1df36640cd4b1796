//! Monte-Carlo message error rate with stage attribution.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::analysis::ChannelConfig;
use super::codebook::{awgn, SccCodebook};
use super::decode::{decode, failure_stage, noise_budget, DecodeStage, DecoderConfig};
use crate::error::{invalid, Result};
use crate::rng::{derive_seed, rng_for};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeEstimate {
    pub trials: usize,
    pub errors: usize,
    pub pe: f64,
    /// Wilson 95% interval.
    pub ci_low: f64,
    pub ci_high: f64,
    /// Trials whose transmitted codeword broke the power budget.
    pub power_violations: usize,
    /// Trials (right or wrong) whose detected support was not the sent one.
    pub support_mismatches: usize,
    /// Errors blamed on support detection.
    pub support_stage_errors: usize,
    /// Errors with the right support but the wrong codeword.
    pub ml_stage_errors: usize,
    /// Errors landing on a codeword whose support differs from the sent one.
    pub cross_support_errors: usize,
    /// Trials where the denoiser missed its residual budget.
    pub residual_violations: usize,
    /// 95th percentile of `||x - x_tilde|| / epsilon`.
    pub beta_hat: f64,
    pub mean_op_count: f64,
}

/// Wilson score interval for `errors` out of `trials`.
pub fn wilson_interval(errors: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = Z95 * Z95;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = Z95 / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

struct Trial {
    error: bool,
    power_violation: bool,
    support_mismatch: bool,
    stage: Option<DecodeStage>,
    cross_support: bool,
    residual_ok: bool,
    amplification: f64,
    ops: u64,
}

/// Uniform random message per trial through encode, AWGN and decode.
/// Trial `i` uses seeds derived from `(seed, i)`, so results do not depend
/// on thread scheduling.
pub fn monte_carlo_pe(
    cb: &SccCodebook,
    ch: &ChannelConfig,
    dec: &DecoderConfig,
    trials: usize,
    seed: u64,
) -> Result<PeEstimate> {
    if trials == 0 {
        return Err(invalid("trials", "need at least one trial"));
    }
    let eps = noise_budget(ch, cb.m());
    let results: Vec<Trial> = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<Trial> {
            let sent = rng_for(seed, "message", t as u64).random_range(0..cb.len());
            let enc = cb.encode(sent)?;
            let y = awgn(&enc.w, ch, derive_seed(seed, "noise", t as u64));
            let (got, diag) = decode(cb, &y, ch, dec)?;
            let x = cb.codeword(sent)?;
            let err_norm = x
                .values()
                .iter()
                .zip(&diag.x_tilde)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            Ok(Trial {
                error: got != sent,
                power_violation: enc.violates_power,
                support_mismatch: diag.detected_support != cb.support(sent),
                stage: failure_stage(cb, &diag, sent, got),
                cross_support: got != sent && cb.support(got) != cb.support(sent),
                residual_ok: diag.residual_ok,
                amplification: err_norm / eps,
                ops: diag.op_count,
            })
        })
        .collect::<Result<_>>()?;

    let count = |f: &dyn Fn(&Trial) -> bool| results.iter().filter(|t| f(t)).count();
    let errors = count(&|t| t.error);
    let (ci_low, ci_high) = wilson_interval(errors, trials);
    let mut amp: Vec<f64> = results.iter().map(|t| t.amplification).collect();
    amp.sort_by(f64::total_cmp);
    let idx = ((0.95 * trials as f64).ceil() as usize).clamp(1, trials) - 1;
    Ok(PeEstimate {
        trials,
        errors,
        pe: errors as f64 / trials as f64,
        ci_low,
        ci_high,
        power_violations: count(&|t| t.power_violation),
        support_mismatches: count(&|t| t.support_mismatch),
        support_stage_errors: count(&|t| t.stage == Some(DecodeStage::Support)),
        ml_stage_errors: count(&|t| t.stage == Some(DecodeStage::MaximumLikelihood)),
        cross_support_errors: count(&|t| t.cross_support),
        residual_violations: count(&|t| !t.residual_ok),
        beta_hat: amp[idx],
        mean_op_count: results.iter().map(|t| t.ops as f64).sum::<f64>() / trials as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cs_core::DimensionPlan;
    use crate::scc::codebook::{build_codebook, CodebookConfig};

    #[test]
    fn wilson_bounds() {
        let (lo, hi) = wilson_interval(0, 100);
        assert!(lo < 1e-12);
        assert!(hi > 0.03 && hi < 0.05);
        let (lo, hi) = wilson_interval(50, 100);
        assert!(lo < 0.5 && hi > 0.5 && (0.5 - lo - (hi - 0.5)).abs() < 1e-12);
    }

    #[test]
    fn noiseless_and_deterministic() {
        let ch = ChannelConfig::new(1.0, 1e-12).unwrap();
        let plan = DimensionPlan::with_m(16, 2, 10).unwrap();
        let cfg = CodebookConfig {
            regime_samples: 0,
            ..CodebookConfig::default()
        };
        let cb = build_codebook(&plan, &ch, 0.6, 2, &cfg).unwrap();
        let dec = DecoderConfig::default_for(&ch, 10, 16);
        let a = monte_carlo_pe(&cb, &ch, &dec, 64, 5).unwrap();
        assert_eq!(a.errors, 0);
        assert_eq!(a, monte_carlo_pe(&cb, &ch, &dec, 64, 5).unwrap());
        assert_eq!(a.support_stage_errors + a.ml_stage_errors, a.errors);
    }
}

//! Three-stage decoder: L2-constrained L1 denoising, support thresholding,
//! and maximum likelihood over codewords sharing the detected support.

use serde::{Deserialize, Serialize};

use super::analysis::ChannelConfig;
use super::codebook::SccCodebook;
use crate::error::{invalid, Error, Result};
use crate::solver::{basis_pursuit_denoise, DenoiseConfig, RecoveryResult};

/// Default `beta`, the assumed L2 noise amplification of the denoiser.
pub const DEFAULT_BETA: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecoderConfig {
    /// Support threshold on `|x_j|`.
    pub tau: f64,
    pub beta: f64,
}

impl DecoderConfig {
    pub fn new(tau: f64, beta: f64) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(invalid("tau", format!("{tau} must be finite and > 0")));
        }
        if !(beta >= 1.0 && beta.is_finite()) {
            return Err(invalid("beta", format!("{beta} must be finite and >= 1")));
        }
        Ok(Self { tau, beta })
    }

    /// `tau = 4 sqrt(beta m N / n)`: four standard deviations of the
    /// per-coordinate denoising error.
    pub fn default_for(ch: &ChannelConfig, m: usize, n: usize) -> Self {
        Self {
            tau: 4.0 * (DEFAULT_BETA * m as f64 * ch.noise / n as f64).sqrt(),
            beta: DEFAULT_BETA,
        }
    }
}

/// L2 budget `sqrt(m N)` of the denoising stage.
pub fn noise_budget(ch: &ChannelConfig, m: usize) -> f64 {
    (m as f64 * ch.noise).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecodeStage {
    /// Detected support differs from the transmitted one.
    Support,
    /// Support right, wrong codeword chosen among those sharing it.
    MaximumLikelihood,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeDiagnostics {
    pub x_tilde: Vec<f64>,
    pub detected_support: Vec<usize>,
    /// Codewords compared in the ML stage.
    pub candidates: usize,
    /// Hamming distance from the detected support to the candidates' (0
    /// when some codeword matched exactly).
    pub fallback_distance: usize,
    pub denoise_residual: f64,
    /// `(1/m) ||y - Phi x_tilde||^2 <= N (1 + 1e-6)`.
    pub residual_ok: bool,
    pub op_count: u64,
}

/// Stage one.
pub fn denoise_stage(cb: &SccCodebook, y: &[f64], ch: &ChannelConfig) -> Result<RecoveryResult> {
    basis_pursuit_denoise(cb.phi(), y, &DenoiseConfig::new(noise_budget(ch, cb.m())))
}

/// Stage two: indices with `|x_j| >= tau`.
pub fn support_stage(x: &[f64], tau: f64) -> Vec<usize> {
    (0..x.len()).filter(|&j| x[j].abs() >= tau).collect()
}

/// Stage three: nearest channel input among codewords whose support equals
/// `support`, or failing that among those at minimum Hamming distance.
/// Returns `(message, candidates, distance)`.
pub fn ml_stage(cb: &SccCodebook, y: &[f64], support: &[usize]) -> (usize, usize, usize) {
    let (candidates, distance): (Vec<usize>, usize) = match cb.by_support().get(support) {
        Some(c) => (c.clone(), 0),
        None => {
            let dist = |s: &[usize]| hamming(s, support);
            let best = cb.by_support().keys().map(|s| dist(s)).min().unwrap_or(0);
            let mut c: Vec<usize> = cb
                .by_support()
                .iter()
                .filter(|(s, _)| dist(s) == best)
                .flat_map(|(_, ids)| ids.iter().copied())
                .collect();
            c.sort_unstable();
            (c, best)
        }
    };
    let mut best = (f64::INFINITY, usize::MAX);
    for &i in &candidates {
        let d: f64 = cb
            .channel_input(i)
            .iter()
            .zip(y)
            .map(|(w, v)| (v - w) * (v - w))
            .sum();
        if d < best.0 || (d == best.0 && i < best.1) {
            best = (d, i);
        }
    }
    (best.1, candidates.len(), distance)
}

/// Size of the symmetric difference of two sorted index sets.
fn hamming(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut common) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                common += 1;
                i += 1;
                j += 1;
            }
        }
    }
    a.len() + b.len() - 2 * common
}

/// Always returns a message; errors only on malformed input.
pub fn decode(
    cb: &SccCodebook,
    y: &[f64],
    ch: &ChannelConfig,
    dec: &DecoderConfig,
) -> Result<(usize, DecodeDiagnostics)> {
    if y.len() != cb.m() {
        return Err(Error::DimensionMismatch {
            expected: cb.m(),
            got: y.len(),
        });
    }
    let rec = denoise_stage(cb, y, ch)?;
    let x_tilde = rec.solution.values().to_vec();
    let detected = support_stage(&x_tilde, dec.tau);
    let (msg, candidates, fallback_distance) = ml_stage(cb, y, &detected);
    let budget = noise_budget(ch, cb.m());
    Ok((
        msg,
        DecodeDiagnostics {
            residual_ok: rec.residual_norm <= budget * (1.0 + 1e-6) + 1e-12,
            denoise_residual: rec.residual_norm,
            x_tilde,
            detected_support: detected,
            candidates,
            fallback_distance,
            op_count: rec.op_count + (candidates * cb.m()) as u64,
        },
    ))
}

/// Stage blamed for a wrong decision, `None` when `decoded == sent`.
pub fn failure_stage(
    cb: &SccCodebook,
    diag: &DecodeDiagnostics,
    sent: usize,
    decoded: usize,
) -> Option<DecodeStage> {
    if decoded == sent {
        None
    } else if diag.detected_support != cb.support(sent) {
        Some(DecodeStage::Support)
    } else {
        Some(DecodeStage::MaximumLikelihood)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cs_core::DimensionPlan;
    use crate::scc::codebook::{awgn, build_codebook, CodebookConfig};

    fn small(noise: f64, seed: u64) -> (SccCodebook, ChannelConfig) {
        let ch = ChannelConfig::new(1.0, noise).unwrap();
        let plan = DimensionPlan::with_m(16, 2, 10).unwrap();
        let cfg = CodebookConfig {
            regime_samples: 0,
            ..CodebookConfig::default()
        };
        (build_codebook(&plan, &ch, 0.8, seed, &cfg).unwrap(), ch)
    }

    #[test]
    fn hamming_distance() {
        assert_eq!(hamming(&[1, 3], &[1, 3]), 0);
        assert_eq!(hamming(&[1, 3], &[1, 4]), 2);
        assert_eq!(hamming(&[1], &[1, 4]), 1);
        assert_eq!(hamming(&[], &[2, 5]), 2);
    }

    #[test]
    fn noiseless_spot_check() {
        let (cb, ch) = small(1e-12, 3);
        let dec = DecoderConfig::default_for(&ch, cb.m(), cb.n());
        for i in (0..cb.len()).step_by(8) {
            let w = cb.encode(i).unwrap().w;
            let (got, diag) = decode(&cb, &w, &ch, &dec).unwrap();
            assert_eq!(got, i);
            assert!(diag.residual_ok);
        }
    }

    #[test]
    fn threshold_on_truth_gives_true_support() {
        let (cb, _) = small(1e-4, 5);
        for i in 0..cb.len() {
            let x = cb.codeword(i).unwrap();
            let min_nz = cb
                .support(i)
                .iter()
                .map(|&j| x.values()[j].abs())
                .fold(f64::INFINITY, f64::min);
            let tau = min_nz * 0.999;
            assert_eq!(support_stage(x.values(), tau), cb.support(i));
        }
    }

    #[test]
    fn noisy_channel_mostly_correct() {
        let (cb, ch) = small(1e-4, 7);
        let dec = DecoderConfig::default_for(&ch, cb.m(), cb.n());
        let mut errors = 0;
        for t in 0..100u64 {
            let i = (t as usize * 37) % cb.len();
            let y = awgn(&cb.encode(i).unwrap().w, &ch, t);
            let (got, diag) = decode(&cb, &y, &ch, &dec).unwrap();
            assert!(diag.residual_ok);
            if got != i {
                errors += 1;
                assert!(failure_stage(&cb, &diag, i, got).is_some());
            }
        }
        assert!(errors <= 5, "{errors}");
    }

    #[test]
    fn fallback_when_support_unseen() {
        let (cb, ch) = small(1e-4, 2);
        let unseen = (0..16)
            .flat_map(|a| (a + 1..16).map(move |b| vec![a, b]))
            .find(|s| !cb.by_support().contains_key(s));
        if let Some(s) = unseen {
            let y = vec![0.0; cb.m()];
            let (_, cands, dist) = ml_stage(&cb, &y, &s);
            assert!(cands > 0 && dist > 0);
        }
        assert!(DecoderConfig::new(0.0, 2.0).is_err());
        assert!(DecoderConfig::new(0.1, 0.5).is_err());
        assert!(decode(&cb, &[0.0; 3], &ch, &DecoderConfig::default_for(&ch, 10, 16)).is_err());
    }
}

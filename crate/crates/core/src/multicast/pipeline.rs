//! SDCIC over a general multicast network.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gf::{FieldElement, GaloisField, DEFAULT_Q};
use super::graph::NetworkGraph;
use super::rlnc::{coding_rank, receiver_decode, rlnc_session};
use crate::error::{invalid, Error, Result};
use crate::rng::derive_seed;
use crate::sdc::{
    cs_decode_with, equal_entropies, select_active_sources, ActivePolicy, ActiveSet, SchemeKind,
    SchemeReport,
};
use crate::solver::SolveStatus;
use crate::source_model::{analytic_entropies, sample_messages, SourceEnsemble};

/// Fixed-point width of a quantized observation.
pub const QUANT_BITS: u32 = 16;

/// Maps reals in `[-range, range]` to `2^16` levels and packs each level
/// into `ceil(16 / q)` field symbols, least significant first.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantizer {
    pub range: f64,
    pub q: u32,
}

impl Quantizer {
    /// Range covering every observation the ensemble can emit:
    /// `max_nonzeros * 2^R * max |Phi_ij|`.
    pub fn for_ensemble(ens: &SourceEnsemble, q: u32) -> Self {
        let amax = ens
            .transform()
            .as_dmatrix()
            .iter()
            .fold(0.0_f64, |a, v| a.max(v.abs()));
        Self {
            range: ens.max_nonzeros() as f64 * ens.levels() as f64 * amax,
            q,
        }
    }

    pub fn symbols_per_value(&self) -> usize {
        QUANT_BITS.div_ceil(self.q) as usize
    }

    /// Grid spacing; the worst-case rounding error is half of it.
    pub fn step(&self) -> f64 {
        2.0 * self.range / ((1u64 << QUANT_BITS) - 1) as f64
    }

    pub fn encode(&self, v: f64) -> Vec<FieldElement> {
        let top = ((1u64 << QUANT_BITS) - 1) as f64;
        let level = if self.range > 0.0 {
            ((v + self.range) / self.step()).round().clamp(0.0, top) as u32
        } else {
            0
        };
        let mask = (1u32 << self.q) - 1;
        (0..self.symbols_per_value())
            .map(|i| ((level >> (i as u32 * self.q)) & mask) as u8)
            .collect()
    }

    pub fn decode(&self, symbols: &[FieldElement]) -> f64 {
        let level = symbols
            .iter()
            .enumerate()
            .fold(0u32, |acc, (i, &s)| acc | (s as u32) << (i as u32 * self.q));
        level as f64 * self.step() - self.range
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MulticastConfig {
    pub q: u32,
    /// Per-coordinate tolerance on the recovered `mu_t`; looser than the
    /// tree tolerance because observations are quantized.
    pub success_tol: f64,
}

impl Default for MulticastConfig {
    fn default() -> Self {
        Self {
            q: DEFAULT_Q,
            success_tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReceiverOutcome {
    pub receiver: usize,
    pub report: SchemeReport,
    pub min_cut: u64,
    pub rank: usize,
    pub max_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MulticastOutcome {
    pub receivers: Vec<ReceiverOutcome>,
    pub quantization_step: f64,
}

impl MulticastOutcome {
    pub fn all_succeeded(&self) -> bool {
        self.receivers.iter().all(|r| r.report.success == Some(true))
    }
}

/// Active source `active.indices[i]` sits at graph source `g.sources()[i]`
/// and injects its quantized observation; every receiver decodes the
/// network code, de-quantizes and runs basis pursuit on the active rows.
pub fn sdcic_multicast_roundtrip(
    ens: &SourceEnsemble,
    g: &NetworkGraph,
    active: &ActiveSet,
    t: u64,
    seed: u64,
    cfg: &MulticastConfig,
) -> Result<MulticastOutcome> {
    let m = active.len();
    if g.sources().len() != m {
        return Err(Error::DimensionMismatch {
            expected: g.sources().len(),
            got: m,
        });
    }
    if cfg.success_tol.is_nan() || cfg.success_tol <= 0.0 {
        return Err(invalid("success_tol", "must be positive"));
    }
    let field = GaloisField::new(cfg.q)?;
    let quant = Quantizer::for_ensemble(ens, cfg.q);
    let msg = sample_messages(ens, t, seed);
    let phi_s = ens.transform().select_rows(&active.indices)?;
    let packets: Vec<Vec<FieldElement>> = active
        .indices
        .iter()
        .map(|&i| quant.encode(msg.observed[i]))
        .collect();
    let session = rlnc_session(g, &packets, &field, derive_seed(seed, "rlnc", t))?;
    let per_source = analytic_entropies(ens, m.max(1))?.per_source;
    let n = ens.n() as u64;
    let spv = quant.symbols_per_value() as u64;

    let mut receivers = Vec::with_capacity(g.receivers().len());
    for (idx, &r) in g.receivers().iter().enumerate() {
        let got = &session.received[idx];
        let rows = got.len() as u64;
        let ge_ops = rows * (m as u64) * (m as u64 + spv);
        let (success, rank, max_error, ops) = match receiver_decode(got, m, &field) {
            Ok(payloads) => {
                let received: Vec<f64> = payloads.iter().map(|p| quant.decode(p)).collect();
                let (rec, mu_hat) = cs_decode_with(&phi_s, ens.transform(), &received)?;
                let err = mu_hat
                    .iter()
                    .zip(&msg.observed)
                    .fold(0.0_f64, |a, (x, y)| a.max((x - y).abs()));
                let ok = rec.status == SolveStatus::Optimal && err <= cfg.success_tol;
                (ok, m, err, ge_ops + rec.op_count + n * n)
            }
            Err(Error::RankDeficient { rank, .. }) => (false, rank, f64::INFINITY, ge_ops),
            Err(e) => return Err(e),
        };
        receivers.push(ReceiverOutcome {
            receiver: r,
            report: SchemeReport {
                scheme: SchemeKind::Sdcic,
                min_cut_rate: per_source * m as f64,
                decode_op_count: Some(ops),
                success: Some(success),
                trial_seed: Some(seed),
            },
            min_cut: session.min_cuts[idx],
            rank,
            max_error,
        });
    }
    Ok(MulticastOutcome {
        receivers,
        quantization_step: quant.step(),
    })
}

/// `trials` independent multicast trials; active sets and message times
/// are derived exactly as in [`crate::sdc::sdcic_trials`].
pub fn multicast_trials(
    ens: &SourceEnsemble,
    g: &NetworkGraph,
    policy: &ActivePolicy,
    trials: usize,
    master_seed: u64,
    cfg: &MulticastConfig,
) -> Result<Vec<MulticastOutcome>> {
    let entropies = equal_entropies(ens);
    let m = g.sources().len();
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let active = select_active_sources(
                ens.n(),
                m,
                policy.clone(),
                &entropies,
                derive_seed(master_seed, "active", i as u64),
            )?;
            let seed = derive_seed(master_seed, "messages", 0);
            sdcic_multicast_roundtrip(ens, g, &active, i as u64, seed, cfg)
        })
        .collect()
}

/// Fraction of seeds `0..seeds` for which each receiver's coding matrix has
/// full rank, with one unit packet per source.
pub fn rlnc_invertibility(g: &NetworkGraph, q: u32, seeds: u64, master_seed: u64) -> Result<Vec<f64>> {
    let field = GaloisField::new(q)?;
    let m = g.sources().len();
    let packets = vec![vec![0u8]; m];
    let mut hits = vec![0u64; g.receivers().len()];
    for s in 0..seeds {
        let session = rlnc_session(g, &packets, &field, derive_seed(master_seed, "rlnc", s))?;
        for (h, got) in hits.iter_mut().zip(&session.received) {
            if coding_rank(got, m, &field) == m {
                *h += 1;
            }
        }
    }
    Ok(hits.iter().map(|&h| h as f64 / seeds.max(1) as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdc::{sdcic_roundtrip, SdcicConfig};
    use crate::source_model::SourceMode;

    #[test]
    fn quantizer_roundtrip() {
        for q in [1, 3, 8] {
            let qz = Quantizer { range: 5.0, q };
            assert_eq!(qz.symbols_per_value(), 16usize.div_ceil(q as usize));
            for v in [-5.0, -1.234, 0.0, 0.5, 4.9999, 5.0] {
                let s = qz.encode(v);
                assert!(s.iter().all(|&x| (x as usize) < 1 << q));
                assert!((qz.decode(&s) - v).abs() <= qz.step() / 2.0 + 1e-12);
            }
        }
    }

    #[test]
    fn depth_one_matches_tree_pipeline() {
        let ens = SourceEnsemble::random_sign(32, 2, 16, 3, SourceMode::FixedK, None, 2).unwrap();
        let g = NetworkGraph::depth1(16).unwrap();
        let cfg = MulticastConfig::default();
        let sdc_cfg = SdcicConfig {
            rip_samples: 0,
            rip_seed: 0,
        };
        let entropies = equal_entropies(&ens);
        for t in 0..20 {
            let active = select_active_sources(32, 16, ActivePolicy::BernoulliGamma, &entropies, t)
                .unwrap();
            let tree = sdcic_roundtrip(&ens, &active, t, 7, &sdc_cfg).unwrap();
            let net = sdcic_multicast_roundtrip(&ens, &g, &active, t, 7, &cfg).unwrap();
            assert_eq!(net.receivers.len(), 1);
            assert_eq!(net.receivers[0].report.success, tree.report.success, "t={t}");
            assert_eq!(net.receivers[0].report.min_cut_rate, tree.report.min_cut_rate);
        }
    }

    #[test]
    fn butterfly_recovers_one_sparse_field() {
        let ens = SourceEnsemble::harmonic(8, 1).unwrap();
        let g = NetworkGraph::butterfly();
        let active = ActiveSet {
            indices: vec![0, 1],
            policy: ActivePolicy::Fixed(vec![0, 1]),
            gamma: 0.25,
            pre_trim_size: None,
        };
        let cfg = MulticastConfig::default();
        let mut both = 0;
        for t in 0..40 {
            let out = sdcic_multicast_roundtrip(&ens, &g, &active, t, 1, &cfg).unwrap();
            both += out.all_succeeded() as usize;
        }
        assert!(both >= 36, "{both}/40");
    }

    #[test]
    fn insufficient_cut_always_fails() {
        let ens = SourceEnsemble::harmonic(8, 1).unwrap();
        // drop b -> t2: t2 now hears only the bottleneck
        let g = NetworkGraph::butterfly().without_edge(5).unwrap();
        let active = ActiveSet {
            indices: vec![0, 1],
            policy: ActivePolicy::Fixed(vec![0, 1]),
            gamma: 0.25,
            pre_trim_size: None,
        };
        for t in 0..20 {
            let out =
                sdcic_multicast_roundtrip(&ens, &g, &active, t, 3, &MulticastConfig::default())
                    .unwrap();
            let t2 = &out.receivers[1];
            assert_eq!(t2.min_cut, 1);
            assert!(t2.rank <= 1);
            assert_eq!(t2.report.success, Some(false));
        }
    }

    #[test]
    fn field_size_matters_on_butterfly() {
        let g = NetworkGraph::butterfly();
        let big = rlnc_invertibility(&g, 8, 400, 1).unwrap();
        let small = rlnc_invertibility(&g, 1, 400, 1).unwrap();
        for (b, s) in big.iter().zip(&small) {
            assert!(*b >= 0.98 && *s < 0.75, "q=8 {b}, q=1 {s}");
        }
    }
}

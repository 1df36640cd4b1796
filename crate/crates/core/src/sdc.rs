//! Sparse distributed compression over a depth-one tree.
//!
//! `m` of the `n` sources transmit their observations independently (their
//! correlation is ignored by the source code); the receiver first decodes
//! the transported messages and then recovers the full latent vector by
//! basis pursuit on the selected rows of the transform.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cs_core::{estimate_rip_constant, MeasurementMatrix, SparseVector};
use crate::error::{invalid, Error, Result};
use crate::rng::{derive_seed, rng_from_seed};
use crate::solver::{basis_pursuit, RecoveryResult, SolveStatus};
use crate::source_model::{analytic_entropies, sample_messages, SourceEnsemble, SourceMode};

/// Absolute per-coordinate tolerance for declaring `mu_t` recovered.
pub const RECOVERY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SchemeKind {
    /// Sparse distributed compression with independent coding.
    Sdcic,
    SlepianWolf,
    SdcPlusSw,
    NaiveIgnorance,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 4] = [
        SchemeKind::Sdcic,
        SchemeKind::SlepianWolf,
        SchemeKind::SdcPlusSw,
        SchemeKind::NaiveIgnorance,
    ];

    pub fn label(self) -> &'static str {
        match self {
            SchemeKind::Sdcic => "SDCIC",
            SchemeKind::SlepianWolf => "SW",
            SchemeKind::SdcPlusSw => "SDC+SW",
            SchemeKind::NaiveIgnorance => "Naive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ActivePolicy {
    /// Each source transmits independently with probability `m / n`.
    BernoulliGamma,
    /// The `m` sources with the smallest entropies, ties by index.
    LowestEntropy,
    /// Caller-supplied indices.
    Fixed(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActiveSet {
    /// Sorted, distinct source indices.
    pub indices: Vec<usize>,
    pub policy: ActivePolicy,
    pub gamma: f64,
    /// Size of the accepted Bernoulli draw before trimming/padding to `m`.
    pub pre_trim_size: Option<usize>,
}

impl ActiveSet {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

pub fn select_active_sources(
    n: usize,
    m: usize,
    policy: ActivePolicy,
    entropies: &[f64],
    seed: u64,
) -> Result<ActiveSet> {
    if m > n {
        return Err(invalid("m", format!("m = {m} exceeds n = {n}")));
    }
    let gamma = m as f64 / n as f64;
    let mut pre_trim_size = None;
    let indices = match &policy {
        ActivePolicy::Fixed(ix) => {
            let mut ix = ix.clone();
            ix.sort_unstable();
            ix.dedup();
            if ix.len() != m || ix.iter().any(|&i| i >= n) {
                return Err(invalid(
                    "active",
                    format!("need {m} distinct indices below {n}"),
                ));
            }
            ix
        }
        ActivePolicy::LowestEntropy => {
            if entropies.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: entropies.len(),
                });
            }
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| entropies[a].total_cmp(&entropies[b]).then(a.cmp(&b)));
            let mut ix = order[..m].to_vec();
            ix.sort_unstable();
            ix
        }
        ActivePolicy::BernoulliGamma => {
            let mut rng = rng_from_seed(seed);
            let window = (n as f64).sqrt().ceil() as usize;
            let drawn = loop {
                let d: Vec<usize> = (0..n).filter(|_| rng.random_bool(gamma)).collect();
                if d.len().abs_diff(m) <= window {
                    break d;
                }
            };
            pre_trim_size = Some(drawn.len());
            let mut chosen = drawn;
            if chosen.len() > m {
                chosen.shuffle(&mut rng);
                chosen.truncate(m);
            } else if chosen.len() < m {
                let mut is_in = vec![false; n];
                chosen.iter().for_each(|&i| is_in[i] = true);
                let mut rest: Vec<usize> = (0..n).filter(|&i| !is_in[i]).collect();
                rest.shuffle(&mut rng);
                chosen.extend_from_slice(&rest[..m - chosen.len()]);
            }
            chosen.sort_unstable();
            chosen
        }
    };
    Ok(ActiveSet {
        indices,
        policy,
        gamma,
        pre_trim_size,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeReport {
    pub scheme: SchemeKind,
    /// Required min-cut rate in bits per time index.
    pub min_cut_rate: f64,
    /// Measured decoder work; `None` for rate-accounting-only schemes.
    pub decode_op_count: Option<u64>,
    pub success: Option<bool>,
    pub trial_seed: Option<u64>,
}

/// Min-cut rates of the four schemes, in [`SchemeKind::ALL`] order.
pub fn rate_table(ens: &SourceEnsemble, m: usize) -> Result<Vec<SchemeReport>> {
    let e = analytic_entropies(ens, m)?;
    Ok(SchemeKind::ALL
        .iter()
        .map(|&scheme| SchemeReport {
            scheme,
            min_cut_rate: match scheme {
                SchemeKind::Sdcic => e.sum_active,
                SchemeKind::SlepianWolf => e.joint,
                SchemeKind::SdcPlusSw => e.subset_m,
                SchemeKind::NaiveIgnorance => e.sum_all,
            },
            decode_op_count: None,
            success: None,
            trial_seed: None,
        })
        .collect())
}

/// Rows of the rate table that break `SW = SDC+SW <= SDCIC <= Naive`.
pub fn rate_ordering_violations(table: &[SchemeReport]) -> Vec<String> {
    let rate = |k: SchemeKind| {
        table
            .iter()
            .find(|r| r.scheme == k)
            .map_or(f64::NAN, |r| r.min_cut_rate)
    };
    let sw = rate(SchemeKind::SlepianWolf);
    let combo = rate(SchemeKind::SdcPlusSw);
    let sdcic = rate(SchemeKind::Sdcic);
    let naive = rate(SchemeKind::NaiveIgnorance);
    let tol = 1e-9 * naive.abs().max(1.0);
    let mut v = Vec::new();
    if !((sw - combo).abs() <= tol) {
        v.push(format!("SW {sw} != SDC+SW {combo}"));
    }
    if !(combo <= sdcic + tol) {
        v.push(format!("SDC+SW {combo} > SDCIC {sdcic}"));
    }
    if !(sdcic <= naive + tol) {
        v.push(format!("SDCIC {sdcic} > Naive {naive}"));
    }
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SdcicConfig {
    /// Sampling budget for the `delta_2k < 1` sanity check; 0 disables it.
    pub rip_samples: usize,
    pub rip_seed: u64,
}

impl Default for SdcicConfig {
    fn default() -> Self {
        Self {
            rip_samples: 200,
            rip_seed: 0,
        }
    }
}

/// Output of one SDCIC transport-and-recover trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdcicOutcome {
    pub report: SchemeReport,
    /// Symbols moved by the independent (correlation-blind) transport.
    pub transport_count: u64,
    pub recovery: RecoveryResult,
    pub recovered_latent: SparseVector,
    pub recovered_observed: Vec<f64>,
    /// Largest absolute error on `mu_t`.
    pub max_error: f64,
    /// `Some(delta_hat_2k)` when the sanity check ran.
    pub rip_delta_2k: Option<f64>,
}

impl SdcicOutcome {
    pub fn rip_ok(&self) -> bool {
        self.rip_delta_2k.is_none_or(|d| d < 1.0)
    }
}

/// Stage one: lossless independent transport of the active observations.
/// Returns the received values and the number of symbols moved.
pub fn transport_stage(observed: &[f64], active: &ActiveSet) -> (Vec<f64>, u64) {
    let received: Vec<f64> = active.indices.iter().map(|&i| observed[i]).collect();
    let count = received.len() as u64;
    (received, count)
}

/// Stage two: basis pursuit on the active rows, then `mu = Phi mu'`.
///
/// An infeasible solve is a decoding failure, not an error.
pub fn cs_decode_stage(
    ens: &SourceEnsemble,
    active: &ActiveSet,
    received: &[f64],
) -> Result<(RecoveryResult, Vec<f64>)> {
    let phi_s = ens.transform().select_rows(&active.indices)?;
    cs_decode_with(&phi_s, ens.transform(), received)
}

pub(crate) fn cs_decode_with(
    phi_s: &MeasurementMatrix,
    transform: &MeasurementMatrix,
    received: &[f64],
) -> Result<(RecoveryResult, Vec<f64>)> {
    let rec = match basis_pursuit(phi_s, received) {
        Ok(r) => r,
        Err(Error::Infeasible(_)) => RecoveryResult::infeasible(phi_s.cols()),
        Err(e) => return Err(e),
    };
    let mu = transform.apply(rec.solution.values())?;
    Ok((rec, mu))
}

pub(crate) fn rip_check(
    phi_s: &MeasurementMatrix,
    k: usize,
    cfg: &SdcicConfig,
) -> Result<Option<f64>> {
    if cfg.rip_samples == 0 || k == 0 {
        return Ok(None);
    }
    let kk = (2 * k).min(phi_s.cols());
    Ok(Some(
        estimate_rip_constant(phi_s, kk, cfg.rip_samples, cfg.rip_seed)?.delta_hat,
    ))
}

pub fn sdcic_roundtrip(
    ens: &SourceEnsemble,
    active: &ActiveSet,
    t: u64,
    seed: u64,
    cfg: &SdcicConfig,
) -> Result<SdcicOutcome> {
    let msg = sample_messages(ens, t, seed);
    let phi_s = ens.transform().select_rows(&active.indices)?;
    let rip_delta_2k = rip_check(&phi_s, ens.k(), cfg)?;

    let (received, transport_count) = transport_stage(&msg.observed, active);
    let (recovery, mu_hat) = cs_decode_with(&phi_s, ens.transform(), &received)?;
    let max_error = mu_hat
        .iter()
        .zip(&msg.observed)
        .fold(0.0_f64, |a, (x, y)| a.max((x - y).abs()));
    let success = recovery.status == SolveStatus::Optimal && max_error <= RECOVERY_TOL;
    let n = ens.n() as u64;
    let e = analytic_entropies(ens, active.len().max(1))?;
    Ok(SdcicOutcome {
        report: SchemeReport {
            scheme: SchemeKind::Sdcic,
            min_cut_rate: e.per_source * active.len() as f64,
            decode_op_count: Some(transport_count + recovery.op_count + n * n),
            success: Some(success),
            trial_seed: Some(seed),
        },
        transport_count,
        recovered_latent: recovery.solution.clone(),
        recovery,
        recovered_observed: mu_hat,
        max_error,
        rip_delta_2k,
    })
}

/// Default per-source entropies for the lowest-entropy policy.
pub fn equal_entropies(ens: &SourceEnsemble) -> Vec<f64> {
    let e = analytic_entropies(ens, ens.n()).map_or(0.0, |r| r.per_source);
    vec![e; ens.n()]
}

/// Runs `trials` independent SDCIC trials; trial `i` draws its active set
/// from `derive_seed(master, "active", i)` and its messages at `t = i`.
pub fn sdcic_trials(
    ens: &SourceEnsemble,
    m: usize,
    policy: &ActivePolicy,
    trials: usize,
    master_seed: u64,
    cfg: &SdcicConfig,
) -> Result<Vec<SdcicOutcome>> {
    let entropies = equal_entropies(ens);
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
            let mut c = *cfg;
            c.rip_seed = derive_seed(master_seed, "rip", i as u64);
            sdcic_roundtrip(ens, &active, i as u64, seed, &c)
        })
        .collect()
}

/// `true` when the recovered latent respects the ensemble sparsity.
pub fn sparsity_consistent(ens: &SourceEnsemble, latent: &SparseVector) -> bool {
    match ens.mode() {
        SourceMode::FixedK => latent.support_with_tol(crate::solver::SUPPORT_TOL).len() <= ens.k(),
        SourceMode::BernoulliSupport => true,
    }
}

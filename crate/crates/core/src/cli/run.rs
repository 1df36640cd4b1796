//! Experiment runners, one per subcommand.

use std::fmt::Write as _;

use rayon::prelude::*;

use super::config::{
    validate, ExperimentConfig, MatrixChoice, PolicyChoice, Subcommand, TransformChoice,
};
use super::output::{write_rows, ResultRow};
use crate::cs_core::{
    bounded_noise, generate_sparse_signal, measure, DimensionPlan, MeasurementMatrix, SupportLaw,
    ValueLaw,
};
use crate::error::{Error, Result};
use crate::multicast::{sdcic_multicast_roundtrip, MulticastConfig, MulticastOutcome};
use crate::rng::derive_seed;
use crate::scc::{
    achievable_rate, build_codebook, capacity, error_exponent_bound, monte_carlo_pe,
    support_error_analytic, ChannelConfig, CodebookConfig, DecoderConfig, MAX_CODEBOOK_BITS,
};
use crate::sdc::{
    equal_entropies, rate_table, sdcic_trials, select_active_sources, ActivePolicy, ActiveSet,
    SdcicConfig,
};
use crate::solver::{basis_pursuit, basis_pursuit_denoise, DenoiseConfig, SolveStatus};
use crate::source_model::{SourceEnsemble, SourceMode};

/// Tolerance for exact recovery in `cs-recover`.
const EXACT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub rows: Vec<ResultRow>,
    /// Human-readable aggregate table.
    pub summary: String,
}

/// Validates, runs the experiment and, if `output_path` is set, writes the
/// rows there. Decoding failures are rows, not errors.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let violations = validate(cfg);
    if let Some(first) = violations.first() {
        let all: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(Error::InvalidParameter {
            name: first.field,
            reason: all.join("; "),
        });
    }
    let out = match cfg.subcommand() {
        Subcommand::CsRecover => cs_recover(cfg)?,
        Subcommand::SdcCompare => sdc_compare(cfg)?,
        Subcommand::MulticastSim => multicast_sim(cfg)?,
        Subcommand::SccSim => scc_sim(cfg)?,
        Subcommand::Rates => rates(cfg)?,
    };
    if let Some(path) = &cfg.output_path {
        write_rows(path, &out.rows, cfg.output_format())?;
    }
    Ok(out)
}

fn row(cfg: &ExperimentConfig, kind: &str, label: impl Into<String>) -> ResultRow {
    let mut r = ResultRow::new(cfg.subcommand().name(), kind, label);
    r.seed = cfg.master_seed;
    r.n = Some(cfg.n());
    r.k = Some(cfg.k());
    r.m = cfg.m().ok();
    r
}

fn percentile95(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let idx = ((0.95 * v.len() as f64).ceil() as usize).clamp(1, v.len()) - 1;
    Some(v[idx])
}

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let (s, c) = v.fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
    if c == 0 {
        0.0
    } else {
        s / c as f64
    }
}

struct CsTrial {
    success: bool,
    max_error: f64,
    ratio: Option<f64>,
    ops: u64,
}

fn cs_recover(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let (n, k, m) = (cfg.n(), cfg.k(), cfg.m()?);
    let seed = cfg.master_seed.unwrap_or_default();
    let levels = 1u32 << cfg.symbol_rate();
    let nr = cfg.noise_ratio();
    let trials = cfg.trials();
    let results: Vec<CsTrial> = (0..trials as u64)
        .into_par_iter()
        .map(|t| -> Result<CsTrial> {
            let phi_seed = derive_seed(seed, "phi", t);
            let phi = match cfg.matrix() {
                MatrixChoice::Bernoulli => MeasurementMatrix::bernoulli(m, n, phi_seed)?,
                MatrixChoice::Gaussian => MeasurementMatrix::gaussian(m, n, phi_seed)?,
            };
            let x = generate_sparse_signal(
                n,
                SupportLaw::FixedK(k),
                ValueLaw::UniformInteger { levels },
                derive_seed(seed, "signal", t),
            )?;
            let mut y = measure(&phi, &x)?;
            if nr == 0.0 {
                return Ok(match basis_pursuit(&phi, &y) {
                    Ok(r) => {
                        let err = r.solution.max_abs_diff(&x);
                        CsTrial {
                            success: err <= EXACT_TOL,
                            max_error: err,
                            ratio: None,
                            ops: r.op_count,
                        }
                    }
                    Err(Error::Infeasible(_)) => CsTrial {
                        success: false,
                        max_error: f64::INFINITY,
                        ratio: None,
                        ops: 0,
                    },
                    Err(e) => return Err(e),
                });
            }
            let eps = nr * y.iter().map(|v| v * v).sum::<f64>().sqrt();
            for (yi, e) in y.iter_mut().zip(bounded_noise(m, eps, derive_seed(seed, "noise", t))) {
                *yi += e;
            }
            let r = basis_pursuit_denoise(&phi, &y, &DenoiseConfig::new(eps))?;
            let l2 = r
                .solution
                .values()
                .iter()
                .zip(x.values())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            Ok(CsTrial {
                success: r.status == SolveStatus::Optimal,
                max_error: r.solution.max_abs_diff(&x),
                ratio: Some(l2 / eps),
                ops: r.op_count,
            })
        })
        .collect::<Result<_>>()?;

    let label = format!(
        "{}-{}",
        if nr == 0.0 { "bp" } else { "bpdn" },
        match cfg.matrix() {
            MatrixChoice::Bernoulli => "bernoulli",
            MatrixChoice::Gaussian => "gaussian",
        }
    );
    let mut rows = Vec::with_capacity(trials + 1);
    for (t, r) in results.iter().enumerate() {
        let mut row = row(cfg, "trial", label.clone());
        row.rho = cfg.rho;
        row.symbol_rate = Some(cfg.symbol_rate());
        row.trial = Some(t as u64);
        row.success = Some(r.success);
        row.max_error = Some(r.max_error);
        row.beta_hat = r.ratio;
        row.op_count = Some(r.ops as f64);
        rows.push(row);
    }
    let success_rate = results.iter().filter(|r| r.success).count() as f64 / trials as f64;
    let beta_hat = percentile95(results.iter().filter_map(|r| r.ratio).collect());
    let mean_ops = mean(results.iter().map(|r| r.ops as f64));
    let mut s = row(cfg, "summary", label.clone());
    s.rho = cfg.rho;
    s.symbol_rate = Some(cfg.symbol_rate());
    s.trials = Some(trials);
    s.success_rate = Some(success_rate);
    s.beta_hat = beta_hat;
    s.op_count = Some(mean_ops);
    rows.push(s);

    let mut summary = format!("cs-recover {label}: n={n} k={k} m={m} trials={trials}\n");
    let _ = writeln!(summary, "  success rate  {success_rate:.4}");
    if let Some(b) = beta_hat {
        let _ = writeln!(summary, "  beta_hat(95%) {b:.4}");
    }
    let _ = writeln!(summary, "  mean ops      {mean_ops:.0}");
    Ok(RunOutput { rows, summary })
}

fn sdc_ensemble(cfg: &ExperimentConfig, m: usize) -> Result<SourceEnsemble> {
    let mode = if cfg.alpha.is_some() {
        SourceMode::BernoulliSupport
    } else {
        SourceMode::FixedK
    };
    SourceEnsemble::random_sign(
        cfg.n(),
        cfg.k(),
        m,
        cfg.symbol_rate(),
        mode,
        cfg.alpha,
        derive_seed(cfg.master_seed.unwrap_or_default(), "ensemble", 0),
    )
}

fn policy(cfg: &ExperimentConfig) -> ActivePolicy {
    match cfg.policy() {
        PolicyChoice::BernoulliGamma => ActivePolicy::BernoulliGamma,
        PolicyChoice::LowestEntropy => ActivePolicy::LowestEntropy,
    }
}

fn table_rows(cfg: &ExperimentConfig, ens: &SourceEnsemble, m: usize) -> Result<Vec<ResultRow>> {
    Ok(rate_table(ens, m)?
        .into_iter()
        .map(|rep| {
            let mut r = row(cfg, "table", rep.scheme.label());
            r.symbol_rate = Some(cfg.symbol_rate());
            r.alpha = Some(ens.alpha());
            r.rate_bits = Some(rep.min_cut_rate);
            r
        })
        .collect())
}

fn render_table(rows: &[ResultRow]) -> String {
    let mut s = format!("  {:<8} {:>12}\n", "scheme", "rate (bits)");
    for r in rows.iter().filter(|r| r.row_kind == "table") {
        let _ = writeln!(s, "  {:<8} {:>12.4}", r.label, r.rate_bits.unwrap_or(f64::NAN));
    }
    s
}

fn sdc_compare(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let m = cfg.m()?;
    let ens = sdc_ensemble(cfg, m)?;
    let seed = cfg.master_seed.unwrap_or_default();
    let trials = cfg.trials();
    let outcomes = sdcic_trials(&ens, m, &policy(cfg), trials, seed, &SdcicConfig::default())?;
    let mut rows = Vec::new();
    for (t, o) in outcomes.iter().enumerate() {
        let mut r = row(cfg, "trial", o.report.scheme.label());
        r.symbol_rate = Some(cfg.symbol_rate());
        r.alpha = Some(ens.alpha());
        r.trial = Some(t as u64);
        r.success = o.report.success;
        r.rate_bits = Some(o.report.min_cut_rate);
        r.max_error = Some(o.max_error);
        r.op_count = o.report.decode_op_count.map(|c| c as f64);
        rows.push(r);
    }
    let success_rate =
        outcomes.iter().filter(|o| o.report.success == Some(true)).count() as f64 / trials as f64;
    let mut table = table_rows(cfg, &ens, m)?;
    for r in &mut table {
        r.row_kind = "summary".into();
        r.trials = Some(trials);
        if r.label == "SDCIC" {
            r.success_rate = Some(success_rate);
            r.op_count = Some(mean(
                outcomes
                    .iter()
                    .filter_map(|o| o.report.decode_op_count.map(|c| c as f64)),
            ));
        }
    }
    let mut summary = format!(
        "sdc-compare: n={} k={} m={m} R={} trials={trials}\n",
        cfg.n(),
        cfg.k(),
        cfg.symbol_rate()
    );
    for r in &table {
        let _ = writeln!(
            summary,
            "  {:<8} rate {:>10.4}{}",
            r.label,
            r.rate_bits.unwrap_or(f64::NAN),
            r.success_rate
                .map(|s| format!("  success {s:.4}"))
                .unwrap_or_default()
        );
    }
    rows.extend(table);
    Ok(RunOutput { rows, summary })
}

fn multicast_sim(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let g = cfg.graph()?;
    let m = g.sources().len();
    let (n, k) = (cfg.n(), cfg.k());
    let seed = cfg.master_seed.unwrap_or_default();
    let trials = cfg.trials();
    let ens = match cfg.transform() {
        TransformChoice::Harmonic => SourceEnsemble::harmonic(n, cfg.symbol_rate())?,
        TransformChoice::RandomSign => sdc_ensemble(cfg, m)?,
    };
    let mcfg = MulticastConfig {
        q: cfg.q(),
        ..MulticastConfig::default()
    };
    let entropies = equal_entropies(&ens);
    let outcomes: Vec<MulticastOutcome> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let active = match cfg.transform() {
                // the recoverable rows of the harmonic transform come first
                TransformChoice::Harmonic => ActiveSet {
                    indices: (0..m).collect(),
                    policy: ActivePolicy::Fixed((0..m).collect()),
                    gamma: m as f64 / n as f64,
                    pre_trim_size: None,
                },
                TransformChoice::RandomSign => select_active_sources(
                    n,
                    m,
                    policy(cfg),
                    &entropies,
                    derive_seed(seed, "active", t),
                )?,
            };
            sdcic_multicast_roundtrip(
                &ens,
                &g,
                &active,
                t,
                derive_seed(seed, "messages", 0),
                &mcfg,
            )
        })
        .collect::<Result<_>>()?;

    let base = |kind: &str, label: String| {
        let mut r = row(cfg, kind, label);
        r.m = Some(m);
        r.k = Some(k);
        r.symbol_rate = Some(cfg.symbol_rate());
        r.q = Some(cfg.q());
        r
    };
    let mut rows = Vec::new();
    for (t, o) in outcomes.iter().enumerate() {
        for rec in &o.receivers {
            let mut r = base("trial", format!("receiver-{}", rec.receiver));
            r.trial = Some(t as u64);
            r.success = rec.report.success;
            r.rate_bits = Some(rec.report.min_cut_rate);
            r.min_cut = Some(rec.min_cut);
            r.rank = Some(rec.rank);
            r.max_error = Some(rec.max_error);
            r.op_count = rec.report.decode_op_count.map(|c| c as f64);
            rows.push(r);
        }
    }
    let mut summary = format!(
        "multicast-sim: {} sources, {} receivers, n={n} q={} trials={trials}\n",
        m,
        g.receivers().len(),
        cfg.q()
    );
    for (idx, &recv) in g.receivers().iter().enumerate() {
        let ok = outcomes
            .iter()
            .filter(|o| o.receivers[idx].report.success == Some(true))
            .count() as f64
            / trials as f64;
        let cut = outcomes.first().map(|o| o.receivers[idx].min_cut);
        let mut r = base("summary", format!("receiver-{recv}"));
        r.trials = Some(trials);
        r.success_rate = Some(ok);
        r.min_cut = cut;
        r.rate_bits = outcomes.first().map(|o| o.receivers[idx].report.min_cut_rate);
        rows.push(r);
        let _ = writeln!(
            summary,
            "  receiver {recv:<4} min-cut {:>3}  success {ok:.4}",
            cut.unwrap_or(0)
        );
    }
    let all = outcomes.iter().filter(|o| o.all_succeeded()).count() as f64 / trials as f64;
    let mut r = base("summary", "all-receivers".into());
    r.trials = Some(trials);
    r.success_rate = Some(all);
    rows.push(r);
    let _ = writeln!(summary, "  all receivers          success {all:.4}");
    Ok(RunOutput { rows, summary })
}

fn scc_sim(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let (n, k, m) = (cfg.n(), cfg.k(), cfg.m()?);
    let plan = DimensionPlan::with_m(n, k, m)?;
    let alpha = k as f64 / n as f64;
    let beta = cfg.beta();
    let seed = cfg.master_seed.unwrap_or_default();
    let cb_seed = derive_seed(seed, "codebook", 0);
    let trial_seed = derive_seed(seed, "trials", 0);
    let trials = cfg.trials();
    let mut rows = Vec::new();
    let mut summary = format!("scc-sim: n={n} k={k} m={m} trials={trials}\n");
    let _ = writeln!(
        summary,
        "  {:>7} {:>7} {:>8} {:>8} {:>22} {:>5} {:>5} {:>5}",
        "snr_db", "rate", "R_ach", "C", "Pe [95% CI]", "E0", "supp", "ml"
    );
    for &snr_db in &cfg.snr_db() {
        let ch = ChannelConfig::from_snr_db(snr_db)?;
        let c = capacity(&ch);
        let probe = CodebookConfig {
            regime_samples: 0,
            ..CodebookConfig::default()
        };
        let delta = build_codebook(&plan, &ch, 0.0, cb_seed, &probe)?.delta_k();
        let r_ach = achievable_rate(k, m, n, alpha, beta, delta, c);
        let rate = cfg
            .rate
            .unwrap_or(r_ach - cfg.rate_margin())
            .clamp(0.0, MAX_CODEBOOK_BITS as f64 / m as f64);
        let cb = build_codebook(&plan, &ch, rate, cb_seed, &CodebookConfig::default())?;
        let dec = match cfg.tau {
            Some(tau) => DecoderConfig::new(tau, beta)?,
            None => DecoderConfig {
                beta,
                ..DecoderConfig::default_for(&ch, m, n)
            },
        };
        let est = monte_carlo_pe(&cb, &ch, &dec, trials, trial_seed)?;
        let exp = error_exponent_bound(n, alpha, beta, cb.delta_k(), &ch);
        let analytic = support_error_analytic(dec.tau, &ch, m, n, alpha, beta)?;
        let mut r = row(cfg, "summary", "scc");
        r.alpha = Some(alpha);
        r.snr_db = Some(snr_db);
        r.trials = Some(trials);
        r.rate_bits = Some(cb.rate());
        r.achievable_rate = Some(r_ach);
        r.capacity = Some(c);
        r.pe = Some(est.pe);
        r.ci_low = Some(est.ci_low);
        r.ci_high = Some(est.ci_high);
        r.success_rate = Some(1.0 - est.pe);
        r.beta_hat = Some(est.beta_hat);
        r.op_count = Some(est.mean_op_count);
        r.power_violations = Some(est.power_violations);
        r.support_errors = Some(est.support_stage_errors);
        r.ml_errors = Some(est.ml_stage_errors);
        r.exponent = Some(exp.exponent);
        r.p_pattern_verbatim = Some(analytic.verbatim.p_pattern);
        r.p_pattern_corrected = Some(analytic.corrected.p_pattern);
        rows.push(r);
        let _ = writeln!(
            summary,
            "  {snr_db:>7.1} {:>7.3} {r_ach:>8.3} {c:>8.3} {:>7.4} [{:.4},{:.4}] {:>5} {:>5} {:>5}",
            cb.rate(),
            est.pe,
            est.ci_low,
            est.ci_high,
            est.power_violations,
            est.support_stage_errors,
            est.ml_stage_errors
        );
    }
    Ok(RunOutput { rows, summary })
}

fn rates(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let m = cfg.m()?;
    let ens = sdc_ensemble(cfg, m)?;
    let rows = table_rows(cfg, &ens, m)?;
    let summary = format!(
        "rates: n={} k={} m={m} R={}\n{}",
        cfg.n(),
        cfg.k(),
        cfg.symbol_rate(),
        render_table(&rows)
    );
    Ok(RunOutput { rows, summary })
}

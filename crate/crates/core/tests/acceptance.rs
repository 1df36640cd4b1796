//! Acceptance criteria 1-9. Each criterion prints one PASS/FAIL line with
//! the measured figures, followed by a summary line naming any failures.
//! The exit status stays zero so a failing criterion does not stop the rest
//! of `cargo test --workspace`; set `ACCEPTANCE_STRICT=1` to exit non-zero.

use std::time::{Duration, Instant};

use csnet::cli::{run, ExperimentConfig, OutputFormat, Subcommand};
use csnet::cs_core::{
    binary_entropy, bounded_noise, generate_sparse_signal, measure, plan_dimensions, Combinations,
    DimensionPlan, MeasurementMatrix, SupportLaw, ValueLaw,
};
use csnet::multicast::{
    brute_force_min_cut, max_flow, rlnc_invertibility, sdcic_multicast_roundtrip, Edge,
    MulticastConfig, NetworkGraph,
};
use csnet::rng::{derive_seed, rng_for};
use csnet::scc::{
    achievable_rate, approx_rate, build_codebook, capacity, error_exponent_bound,
    monte_carlo_pe, support_error_analytic, ChannelConfig, CodebookConfig, DecoderConfig,
    PeEstimate,
};
use csnet::sdc::{
    cs_decode_stage, equal_entropies, rate_ordering_violations, rate_table, sdcic_roundtrip,
    sdcic_trials, select_active_sources, transport_stage, ActivePolicy, SdcicConfig,
};
use csnet::solver::{basis_pursuit, basis_pursuit_denoise, l0_oracle, DenoiseConfig};
use csnet::source_model::{
    analytic_entropies, plugin_joint_entropy, sample_messages, SourceEnsemble, SourceMode,
};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

const EXACT_TOL: f64 = 1e-6;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

// ---------------------------------------------------------------- 1
fn criterion_1() -> Verdict {
    let (n, k) = (128, 4);
    let plan = plan_dimensions(n, k, 3.0).unwrap();
    let start = Instant::now();
    let rate = |m: usize| {
        let mut ok = 0;
        for t in 0..100u64 {
            let phi = MeasurementMatrix::bernoulli(m, n, derive_seed(1, "phi", t)).unwrap();
            let x = generate_sparse_signal(
                n,
                SupportLaw::FixedK(k),
                ValueLaw::UniformInteger { levels: 16 },
                derive_seed(1, "signal", t),
            )
            .unwrap();
            let y = measure(&phi, &x).unwrap();
            if let Ok(r) = basis_pursuit(&phi, &y) {
                ok += (r.solution.max_abs_diff(&x) <= EXACT_TOL) as usize;
            }
        }
        ok as f64 / 100.0
    };
    let at_plan = rate(plan.m);
    let control = rate(k - 1);
    let elapsed = start.elapsed();
    verdict(
        plan.m == 42 && at_plan >= 0.95 && control <= 0.10 && elapsed <= Duration::from_secs(120),
        format!(
            "m={} exact-recovery {at_plan:.2} (>= 0.95), m=k-1 control {control:.2} (<= 0.10), \
             {:.1}s single-threaded (<= 120s)",
            plan.m,
            elapsed.as_secs_f64()
        ),
    )
}

// ---------------------------------------------------------------- 2
fn criterion_2() -> Verdict {
    let (n, k, m) = (128, 4, 48);
    let mut ratios = Vec::new();
    for t in 0..100u64 {
        let phi = MeasurementMatrix::bernoulli(m, n, derive_seed(2, "phi", t)).unwrap();
        let x = generate_sparse_signal(
            n,
            SupportLaw::FixedK(k),
            ValueLaw::UniformInteger { levels: 16 },
            derive_seed(2, "signal", t),
        )
        .unwrap();
        let y0 = measure(&phi, &x).unwrap();
        let eps = 0.01 * y0.iter().map(|v| v * v).sum::<f64>().sqrt();
        let y: Vec<f64> = y0
            .iter()
            .zip(bounded_noise(m, eps, derive_seed(2, "noise", t)))
            .map(|(a, b)| a + b)
            .collect();
        let r = basis_pursuit_denoise(&phi, &y, &DenoiseConfig::new(eps)).unwrap();
        let err = r
            .solution
            .values()
            .iter()
            .zip(x.values())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        ratios.push(err / eps);
    }
    ratios.sort_by(f64::total_cmp);
    let beta_hat = ratios[94];
    verdict(
        beta_hat.is_finite() && beta_hat <= 10.0,
        format!("beta_hat (95th pct of ||x - x_hat|| / eps) = {beta_hat:.4} (<= 10)"),
    )
}

// ---------------------------------------------------------------- 3
/// `x0` is the unique L1 minimiser if `Phi_S` has full column rank and the
/// least-norm dual vector `v = Phi_S (Phi_S^T Phi_S)^-1 sign(x_S)` satisfies
/// `|phi_j^T v| < 1` off the support.
fn strict_dual_certificate(a: &DMatrix<f64>, support: &[usize], x: &[f64]) -> bool {
    let sub = a.select_columns(support);
    let gram = sub.transpose() * &sub;
    let Some(chol) = gram.cholesky() else {
        return false;
    };
    let s = DVector::from_iterator(support.len(), support.iter().map(|&j| x[j].signum()));
    let v = &sub * chol.solve(&s);
    (0..a.ncols())
        .filter(|j| !support.contains(j))
        .all(|j| a.column(j).dot(&v).abs() < 1.0 - 1e-9)
}

/// Every `2k` columns independent, so no other `k`-sparse vector fits `y`.
fn spark_exceeds(a: &DMatrix<f64>, two_k: usize) -> bool {
    if two_k > a.nrows() {
        return false;
    }
    Combinations::new(a.ncols(), two_k).all(|cols| {
        let sv = a.select_columns(&cols).singular_values();
        sv.min() > 1e-9 * sv.max().max(1.0)
    })
}

fn criterion_3() -> Verdict {
    let mut rng = rng_for(3, "instances", 0);
    let (mut certified, mut agree, mut uncertified_agree) = (0, 0, 0);
    for i in 0..500u64 {
        let n = rng.random_range(4..=16usize);
        let k = rng.random_range(1..=2usize);
        let m = rng.random_range((2 * k).min(n)..=n);
        let phi = MeasurementMatrix::gaussian(m, n, derive_seed(3, "phi", i)).unwrap();
        let x0 = generate_sparse_signal(
            n,
            SupportLaw::FixedK(k),
            ValueLaw::Gaussian { variance: 1.0 },
            derive_seed(3, "x", i),
        )
        .unwrap();
        let y = measure(&phi, &x0).unwrap();
        let a = phi.as_dmatrix();
        let support = x0.support();
        let cert =
            strict_dual_certificate(a, &support, x0.values()) && spark_exceeds(a, 2 * k);
        let bp = basis_pursuit(&phi, &y).unwrap();
        let same = match l0_oracle(&phi, &y, k) {
            Ok(o) => bp.solution.max_abs_diff(&o.solution) <= EXACT_TOL,
            Err(_) => false,
        };
        if cert {
            certified += 1;
            agree += same as usize;
        } else {
            uncertified_agree += same as usize;
        }
    }
    verdict(
        certified > 0 && agree == certified,
        format!(
            "{agree}/{certified} certified instances agree to 1e-6 \
             ({uncertified_agree}/{} uncertified agree, not scored)",
            500 - certified
        ),
    )
}

// ---------------------------------------------------------------- 4
fn criterion_4() -> Verdict {
    // plug-in vs exact per-coordinate law
    let (n, alpha, r) = (8usize, 0.25, 2u32);
    let ens =
        SourceEnsemble::random_sign(n, 2, 4, r, SourceMode::BernoulliSupport, Some(alpha), 4)
            .unwrap();
    let plugin = plugin_joint_entropy(&ens, 1_000_000, 4).unwrap();
    let levels = (1u32 << r) as f64;
    let per_coord = -(1.0 - alpha) * (1.0 - alpha).log2() - alpha * (alpha / levels).log2();
    let exact = n as f64 * per_coord;
    let rel = (plugin - exact).abs() / exact;
    let analog = n as f64 * binary_entropy(alpha).unwrap() + n as f64 * alpha * (r as f64 + 1.0);

    // fuzzed analytic ordering
    let mut rng = rng_for(4, "fuzz", 0);
    let mut violations = 0;
    let mut tried = 0;
    while tried < 1000 {
        let n = rng.random_range(16..=4096usize);
        let k = rng.random_range(1..=(n / 10).max(1));
        let Ok(plan) = plan_dimensions(n, k, 3.0) else {
            continue;
        };
        tried += 1;
        let sr = rng.random_range(1..=20u32);
        let ens = SourceEnsemble::new(
            k,
            k as f64 / n as f64,
            MeasurementMatrix::identity(n),
            sr,
            SourceMode::FixedK,
        )
        .unwrap();
        let table = rate_table(&ens, plan.m).unwrap();
        violations += rate_ordering_violations(&table).len();
    }

    // the stated table
    let ens = SourceEnsemble::random_sign(10, 2, 6, 4, SourceMode::FixedK, None, 1).unwrap();
    let got: Vec<f64> = rate_table(&ens, 6).unwrap().iter().map(|r| r.min_cut_rate).collect();
    let want = [27.0, 17.2193, 17.2193, 45.0];
    let table_ok = got.iter().zip(want).all(|(g, w)| (g - w).abs() <= 1e-3);
    let subset = analytic_entropies(&ens, 6).unwrap();

    verdict(
        rel <= 0.05 && violations == 0 && table_ok && subset.ordering_violations().is_empty(),
        format!(
            "plug-in {plugin:.4} vs exact {exact:.4} bits (rel {:.2}%, <= 5%; count-based \
             analog {analog:.4}); {violations} ordering violations in {tried} fuzzed ensembles; \
             table {got:.4?}",
            100.0 * rel
        ),
    )
}

// ---------------------------------------------------------------- 5
fn criterion_5() -> Verdict {
    let (n, k) = (128, 4);
    let m = plan_dimensions(n, k, 3.0).unwrap().m;
    let ens = SourceEnsemble::random_sign(n, k, m, 4, SourceMode::FixedK, None, 5).unwrap();
    let cfg = SdcicConfig {
        rip_samples: 200,
        rip_seed: 5,
    };
    let outs = sdcic_trials(&ens, m, &ActivePolicy::BernoulliGamma, 100, 5, &cfg).unwrap();
    let rate = outs.iter().filter(|o| o.report.success == Some(true)).count() as f64 / 100.0;
    let rip_ok = outs.iter().filter(|o| o.rip_ok()).count();

    // ground-truth feed into stage two reproduces the pipeline bit for bit
    let entropies = equal_entropies(&ens);
    let mut exact = true;
    for t in 0..20u64 {
        let active =
            select_active_sources(n, m, ActivePolicy::BernoulliGamma, &entropies, t).unwrap();
        let full = sdcic_roundtrip(&ens, &active, t, 55, &cfg).unwrap();
        let msg = sample_messages(&ens, t, 55);
        let truth: Vec<f64> = active.indices.iter().map(|&i| msg.observed[i]).collect();
        let (transported, _) = transport_stage(&msg.observed, &active);
        let (rec, mu) = cs_decode_stage(&ens, &active, &truth).unwrap();
        exact &= transported == truth
            && mu == full.recovered_observed
            && rec.solution == full.recovered_latent;
    }
    verdict(
        rate >= 0.95 && exact,
        format!(
            "sdcic success {rate:.2} at n={n} k={k} m={m} (>= 0.95, delta_2k < 1 in {rip_ok}/100); \
             stage decomposition bit-exact: {exact}"
        ),
    )
}

// ---------------------------------------------------------------- 6
fn all_small_dags() -> Vec<NetworkGraph> {
    let mut out = Vec::new();
    for nodes in 2..=5usize {
        let pairs: Vec<(usize, usize)> = (0..nodes)
            .flat_map(|i| (i + 1..nodes).map(move |j| (i, j)))
            .collect();
        for mask in 0u32..(1 << pairs.len()) {
            if mask.count_ones() > 8 {
                continue;
            }
            for weighted in [false, true] {
                let edges: Vec<Edge> = pairs
                    .iter()
                    .enumerate()
                    .filter(|(b, _)| mask >> b & 1 == 1)
                    .map(|(_, &(i, j))| Edge {
                        from: i,
                        to: j,
                        capacity: if weighted { 1 + ((i + 2 * j) % 3) as u32 } else { 1 },
                    })
                    .collect();
                // placeholder roles; the suite sweeps them explicitly
                out.push(NetworkGraph::new(nodes, edges, vec![0], vec![nodes - 1]).unwrap());
            }
        }
    }
    out
}

fn criterion_6() -> Verdict {
    let mut cases = 0u64;
    let mut mismatches = 0u64;
    for g in all_small_dags() {
        let nodes = g.num_nodes();
        for receiver in 0..nodes {
            let others: Vec<usize> = (0..nodes).filter(|&v| v != receiver).collect();
            for smask in 1u32..(1 << others.len()) {
                let sources: Vec<usize> = others
                    .iter()
                    .enumerate()
                    .filter(|(b, _)| smask >> b & 1 == 1)
                    .map(|(_, &v)| v)
                    .collect();
                let f = max_flow(&g, &sources, receiver).unwrap();
                let cut = brute_force_min_cut(&g, &sources, receiver).unwrap();
                cases += 1;
                if f.value != cut || !f.violations(&g, &sources, receiver).is_empty() {
                    mismatches += 1;
                }
            }
        }
    }

    let inv = rlnc_invertibility(&NetworkGraph::butterfly(), 8, 1000, 6).unwrap();
    let inv_ok = inv.iter().all(|&p| p >= 0.99);

    let plan = plan_dimensions(64, 2, 3.0).unwrap();
    let ens = SourceEnsemble::random_sign(64, 2, plan.m, 3, SourceMode::FixedK, None, 6).unwrap();
    let g = NetworkGraph::depth1(plan.m).unwrap();
    let entropies = equal_entropies(&ens);
    let no_rip = SdcicConfig {
        rip_samples: 0,
        rip_seed: 0,
    };
    let mut same = 0;
    for t in 0..100u64 {
        let active = select_active_sources(
            64,
            plan.m,
            ActivePolicy::BernoulliGamma,
            &entropies,
            derive_seed(6, "active", t),
        )
        .unwrap();
        let seed = derive_seed(6, "messages", t);
        let tree = sdcic_roundtrip(&ens, &active, t, seed, &no_rip).unwrap();
        let net = sdcic_multicast_roundtrip(&ens, &g, &active, t, seed, &MulticastConfig::default())
            .unwrap();
        same += (net.receivers[0].report.success == tree.report.success) as usize;
    }
    verdict(
        mismatches == 0 && inv_ok && same == 100,
        format!(
            "max-flow vs brute-force cut: {mismatches} mismatches in {cases} cases; butterfly \
             GF(256) invertibility per receiver {inv:.3?} (>= 0.99 over 1000 seeds); depth-1 \
             reduction {same}/100 identical"
        ),
    )
}

// ---------------------------------------------------------------- 7
fn small_code(ch: &ChannelConfig, rate: f64) -> csnet::scc::SccCodebook {
    let plan = DimensionPlan::with_m(16, 2, 10).unwrap();
    build_codebook(&plan, ch, rate, 7, &CodebookConfig::default()).unwrap()
}

fn pe_at(snr_db: f64, rate: f64, trials: usize) -> (PeEstimate, f64, f64) {
    let ch = ChannelConfig::from_snr_db(snr_db).unwrap();
    let cb = small_code(&ch, rate);
    let dec = DecoderConfig::default_for(&ch, cb.m(), cb.n());
    let est = monte_carlo_pe(&cb, &ch, &dec, trials, 77).unwrap();
    let r_ach = achievable_rate(2, 10, 16, 0.125, dec.beta, cb.delta_k(), capacity(&ch));
    (est, r_ach, cb.rate())
}

fn criterion_7() -> Verdict {
    let (at40, r_ach, rate) = pe_at(40.0, 0.8, 500);
    let margin_ok = rate <= r_ach - 0.25;
    let pe_ok = at40.pe <= 0.05;

    let sweep: Vec<PeEstimate> = [10.0, 20.0, 30.0, 40.0]
        .iter()
        .map(|&s| pe_at(s, 0.8, 500).0)
        .collect();
    let mut mono = true;
    for i in 0..sweep.len() {
        for j in i + 1..sweep.len() {
            let down = sweep[j].pe <= sweep[i].pe;
            let overlap = sweep[j].ci_low <= sweep[i].ci_high;
            mono &= down || (j == i + 1 && overlap);
        }
    }
    let hand = achievable_rate(2, 8, 16, 0.125, 2.0, 0.3, 5.0);
    let hand_ok = (hand - 2.16494).abs() <= 1e-4;

    let e0 = |n: usize, k: usize, m: usize| {
        let plan = DimensionPlan::with_m(n, k, m).unwrap();
        let ch = ChannelConfig::from_snr_db(40.0).unwrap();
        build_codebook(&plan, &ch, 12.0 / m as f64, 70, &CodebookConfig::default())
            .unwrap()
            .power_violation_rate()
    };
    let (e16, e64) = (e0(16, 2, 10), e0(64, 8, 40));

    verdict(
        margin_ok && pe_ok && mono && hand_ok && e16 > e64,
        format!(
            "Pe(40 dB) {:.4} [{:.4},{:.4}] at rate {rate:.3} vs achievable {r_ach:.3} \
             (margin ok: {margin_ok}); Pe sweep 10/20/30/40 dB {:.4?} nonincreasing: {mono}; \
             rate formula {hand:.6} vs hand value 2.16494 (|diff| {:.2e}, tol 1e-4); \
             E0 rate n=16 {e16:.4} > n=64 {e64:.4}",
            at40.pe,
            at40.ci_low,
            at40.ci_high,
            sweep.iter().map(|e| e.pe).collect::<Vec<_>>(),
            (hand - 2.16494).abs()
        ),
    )
}

// ---------------------------------------------------------------- 8
fn criterion_8() -> Verdict {
    let checks = [
        ("binary_entropy(0.2)", binary_entropy(0.2).unwrap(), 0.721928),
        ("binary_entropy(0.5)", binary_entropy(0.5).unwrap(), 1.0),
        ("capacity(P/N=1000)", capacity(&ChannelConfig::new(1000.0, 1.0).unwrap()), 4.98289),
        ("capacity(P/N=4)", capacity(&ChannelConfig::new(4.0, 1.0).unwrap()), 1.0),
        ("approx_rate(0.5, 4)", approx_rate(0.5, 4.0).unwrap(), 6.0),
        (
            "error_exponent(16, 0.125, 2, 0.3, 1e4)",
            error_exponent_bound(16, 0.125, 2.0, 0.3, &ChannelConfig::new(1e4, 1.0).unwrap())
                .exponent,
            20.6073,
        ),
    ];
    let mut failed = Vec::new();
    for (name, got, want) in &checks {
        if (got - want).abs() > 1e-4 {
            failed.push(format!("{name} = {got:.6} vs {want} (|diff| {:.2e})", (got - want).abs()));
        }
    }

    // verbatim vs corrected support-error report in the two documented regimes
    let ch = ChannelConfig::new(1.0, 1e-3).unwrap();
    let huge_tau = support_error_analytic(1e3, &ch, 10, 16, 0.125, 2.0).unwrap();
    let loud = ChannelConfig::new(1e9, 1e-3).unwrap();
    let high_snr = support_error_analytic(0.1, &loud, 10, 16, 0.125, 2.0).unwrap();
    let flags_ok = huge_tau.verbatim.p_given_zero > 1.0 - 1e-9
        && huge_tau.corrected.p_given_zero < 1e-9
        && huge_tau.verbatim_out_of_range.iter().any(|f| f == "p_given_nonzero")
        && high_snr.verbatim_out_of_range.iter().any(|f| f == "p_given_nonzero");

    verdict(
        failed.is_empty() && flags_ok,
        format!(
            "{} of {} hand evaluations within 1e-4{}; discrepancy report: large tau verbatim \
             p0 {:.3} vs corrected {:.1e}, flags {:?}; high SNR verbatim p1 {:.2e}, flags {:?}",
            checks.len() - failed.len(),
            checks.len(),
            if failed.is_empty() {
                String::new()
            } else {
                format!(" [mismatch: {}]", failed.join("; "))
            },
            huge_tau.verbatim.p_given_zero,
            huge_tau.corrected.p_given_zero,
            huge_tau.verbatim_out_of_range,
            high_snr.verbatim.p_given_nonzero,
            high_snr.verbatim_out_of_range
        ),
    )
}

// ---------------------------------------------------------------- 9
fn criterion_9() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let mut identical = 0;
    let mut total = 0;
    let subs = [
        Subcommand::CsRecover,
        Subcommand::SdcCompare,
        Subcommand::MulticastSim,
        Subcommand::SccSim,
        Subcommand::Rates,
    ];
    for sub in subs {
        for format in [OutputFormat::Csv, OutputFormat::Json] {
            let mut bytes = Vec::new();
            for (attempt, threads) in [(0, 1), (1, 4)] {
                let path = dir.path().join(format!("{}-{attempt}.out", sub.name()));
                let cfg = ExperimentConfig {
                    subcommand: Some(sub),
                    master_seed: Some(9),
                    trials: Some(20),
                    output_path: Some(path.clone()),
                    output_format: Some(format),
                    snr_db: Some(vec![20.0, 30.0]),
                    ..Default::default()
                };
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build()
                    .unwrap();
                pool.install(|| run(&cfg)).unwrap();
                bytes.push(std::fs::read(&path).unwrap());
            }
            total += 1;
            identical += (bytes[0] == bytes[1]) as usize;
        }
    }
    verdict(
        identical == total,
        format!("{identical}/{total} (subcommand, format) reruns byte-identical across 1 and 4 threads"),
    )
}

fn main() {
    let criteria: [(u32, fn() -> Verdict); 9] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
    ];
    let filter: Option<u32> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut failed = Vec::new();
    for (id, f) in criteria {
        if filter.is_some_and(|want| want != id) {
            continue;
        }
        let start = Instant::now();
        let v = f();
        println!(
            "criterion {id}: {} ({:.1}s) {}",
            if v.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            v.detail
        );
        if !v.pass {
            failed.push(id);
        }
    }
    if !failed.is_empty() {
        println!("acceptance: FAILED criteria {failed:?}");
        if std::env::var_os("ACCEPTANCE_STRICT").is_some() {
            std::process::exit(1);
        }
        return;
    }
    println!("acceptance: all criteria passed");
}

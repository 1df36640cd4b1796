//! Message error rate of a sparse channel code across SNR.
//!
//!     cargo run --release --example sparse_channel_code -- [trials]

use csnet::cs_core::{binary_entropy, DimensionPlan};
use csnet::scc::{
    achievable_rate, build_codebook, capacity, error_exponent_bound, monte_carlo_pe,
    ChannelConfig, CodebookConfig, DecoderConfig, DEFAULT_BETA,
};

fn main() -> csnet::Result<()> {
    let trials: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(500);
    let (n, k, m) = (16, 2, 10);
    let alpha = k as f64 / n as f64;
    let plan = DimensionPlan::with_m(n, k, m)?;
    println!("n = {n}, k = {k}, m = {m}, Hb(alpha) = {:.4}", binary_entropy(alpha)?);
    println!(
        "{:>6} {:>8} {:>9} {:>7} {:>17} {:>6} {:>6} {:>6} {:>8} {:>9}",
        "snr", "C", "R_ach", "R", "Pe [95% CI]", "E0", "supp", "ml", "beta", "exponent"
    );
    for snr_db in [10.0, 20.0, 30.0, 40.0] {
        let ch = ChannelConfig::from_snr_db(snr_db)?;
        // 256 messages; the rate is fixed, the channel varies
        let cb = build_codebook(&plan, &ch, 0.8, 11, &CodebookConfig::default())?;
        let r_ach = achievable_rate(k, m, n, alpha, DEFAULT_BETA, cb.delta_k(), capacity(&ch));
        let dec = DecoderConfig::default_for(&ch, m, n);
        let est = monte_carlo_pe(&cb, &ch, &dec, trials, 3)?;
        let exp = error_exponent_bound(n, alpha, DEFAULT_BETA, cb.delta_k(), &ch);
        println!(
            "{snr_db:>6.1} {:>8.3} {r_ach:>9.3} {:>7.3} {:>5.3} [{:.3},{:.3}] {:>6} {:>6} {:>6} {:>8.3} {:>9.2}",
            capacity(&ch),
            cb.rate(),
            est.pe,
            est.ci_low,
            est.ci_high,
            est.power_violations,
            est.support_stage_errors,
            est.ml_stage_errors,
            est.beta_hat,
            exp.exponent
        );
    }
    Ok(())
}

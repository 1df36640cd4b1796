//! Exact-recovery rate of basis pursuit as the measurement count varies.
//!
//! For each m, draws a random-sign m x n matrix and k-sparse integer
//! signals, and counts how often the L1 decoder returns the signal exactly.
//!
//!     cargo run --release --example phase_transition -- [n] [k] [trials]

use csnet::cs_core::{
    generate_sparse_signal, measure, plan_dimensions, MeasurementMatrix, SupportLaw, ValueLaw,
    DEFAULT_RHO,
};
use csnet::rng::derive_seed;
use csnet::solver::basis_pursuit;

fn main() -> csnet::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let n = args.first().copied().unwrap_or(128);
    let k = args.get(1).copied().unwrap_or(4);
    let trials = args.get(2).copied().unwrap_or(100);
    let plan = plan_dimensions(n, k, DEFAULT_RHO)?;
    println!("n = {n}, k = {k}, planned m = {} (rho = {DEFAULT_RHO})", plan.m);
    println!("{:>5} {:>10} {:>14}", "m", "success", "mean ops");

    let mut ms: Vec<usize> = vec![k.saturating_sub(1).max(1), 2 * k, 4 * k, 6 * k, plan.m, n / 2];
    ms.retain(|&m| m <= n);
    ms.sort_unstable();
    ms.dedup();
    for m in ms {
        let mut ok = 0;
        let mut ops = 0u64;
        for t in 0..trials as u64 {
            let phi = MeasurementMatrix::bernoulli(m, n, derive_seed(1, "phi", t))?;
            let x = generate_sparse_signal(
                n,
                SupportLaw::FixedK(k),
                ValueLaw::UniformInteger { levels: 16 },
                derive_seed(1, "x", t),
            )?;
            let y = measure(&phi, &x)?;
            if let Ok(r) = basis_pursuit(&phi, &y) {
                ops += r.op_count;
                if r.solution.max_abs_diff(&x) <= 1e-6 {
                    ok += 1;
                }
            }
        }
        println!(
            "{m:>5} {:>10.3} {:>14}",
            ok as f64 / trials as f64,
            ops / trials as u64
        );
    }
    Ok(())
}

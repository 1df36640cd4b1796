//! Sampled restricted-isometry constants of random-sign matrices. The
//! figures are lower bounds: only a sample of column subsets is checked.
//!
//!     cargo run --release --example rip_estimate -- [m] [n]

use csnet::cs_core::{estimate_rip_constant, MeasurementMatrix};

fn main() -> csnet::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let m = args.first().copied().unwrap_or(40);
    let n = args.get(1).copied().unwrap_or(128);
    let phi = MeasurementMatrix::bernoulli(m, n, 5)?;
    println!("{m} x {n} random-sign matrix");
    println!("{:>4} {:>10} {:>11} {:>8}", "k", "delta_hat", "exhaustive", "subsets");
    for k in [1, 2, 4, 8, 16] {
        if k > n {
            break;
        }
        let e = estimate_rip_constant(&phi, k, 1000, 5)?;
        println!(
            "{k:>4} {:>10.4} {:>11} {:>8}",
            e.delta_hat, e.exhaustive, e.num_samples
        );
    }
    Ok(())
}

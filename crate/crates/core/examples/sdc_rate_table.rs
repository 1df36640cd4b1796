//! Min-cut rate each scheme needs, across problem sizes.
//!
//!     cargo run --release --example sdc_rate_table

use csnet::cs_core::{plan_dimensions, DEFAULT_RHO};
use csnet::sdc::{rate_ordering_violations, rate_table};
use csnet::source_model::{SourceEnsemble, SourceMode};

fn main() -> csnet::Result<()> {
    println!(
        "{:>6} {:>4} {:>5} {:>10} {:>10} {:>10} {:>10}",
        "n", "k", "m", "SDCIC", "SW", "SDC+SW", "naive"
    );
    for (n, k) in [(64, 2), (128, 4), (256, 8), (1024, 16)] {
        let m = plan_dimensions(n, k, DEFAULT_RHO)?.m;
        let ens = SourceEnsemble::random_sign(n, k, m, 4, SourceMode::FixedK, None, 3)?;
        let table = rate_table(&ens, m)?;
        let r: Vec<f64> = table.iter().map(|row| row.min_cut_rate).collect();
        println!(
            "{n:>6} {k:>4} {m:>5} {:>10.2} {:>10.2} {:>10.2} {:>10.2}",
            r[0], r[1], r[2], r[3]
        );
        for v in rate_ordering_violations(&table) {
            println!("  ordering violation: {v}");
        }
    }
    Ok(())
}

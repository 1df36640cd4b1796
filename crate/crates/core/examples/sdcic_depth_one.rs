//! SDCIC over a depth-one tree: success rate against the number of active
//! sources the receiver hears from.
//!
//!     cargo run --release --example sdcic_depth_one

use csnet::cs_core::{plan_dimensions, DEFAULT_RHO};
use csnet::sdc::{sdcic_trials, ActivePolicy, SdcicConfig};
use csnet::source_model::{SourceEnsemble, SourceMode};

fn main() -> csnet::Result<()> {
    let (n, k, trials) = (128, 4, 50);
    let planned = plan_dimensions(n, k, DEFAULT_RHO)?.m;
    println!("n = {n}, k = {k}, planned m = {planned}");
    println!("{:>5} {:>9} {:>12}", "m", "success", "mean ops");
    for m in [8, 16, 24, 32, planned, 64] {
        let ens = SourceEnsemble::random_sign(n, k, m, 4, SourceMode::FixedK, None, 5)?;
        let outs = sdcic_trials(
            &ens,
            m,
            &ActivePolicy::BernoulliGamma,
            trials,
            5,
            &SdcicConfig { rip_samples: 0, rip_seed: 0 },
        )?;
        let ok = outs.iter().filter(|o| o.report.success == Some(true)).count();
        let ops: u64 = outs.iter().filter_map(|o| o.report.decode_op_count).sum();
        println!(
            "{m:>5} {:>9.2} {:>12}",
            ok as f64 / trials as f64,
            ops / trials as u64
        );
    }
    Ok(())
}

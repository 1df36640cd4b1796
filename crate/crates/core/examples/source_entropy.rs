//! Closed-form entropies of a correlated source ensemble next to a plug-in
//! estimate from samples.
//!
//!     cargo run --release --example source_entropy

use csnet::source_model::{
    analytic_entropies, exact_joint_entropy, plugin_joint_entropy, SourceEnsemble, SourceMode,
};

fn main() -> csnet::Result<()> {
    let ens = SourceEnsemble::random_sign(8, 2, 4, 2, SourceMode::BernoulliSupport, Some(0.25), 1)?;
    let exact = exact_joint_entropy(&ens);
    println!("n = 8, alpha = 0.25, R = 2");
    println!("exact joint entropy        {exact:.4} bits");
    for samples in [10_000, 100_000, 1_000_000] {
        let est = plugin_joint_entropy(&ens, samples, 2)?;
        println!("plug-in, {samples:>9} samples {est:.4} bits");
    }

    let ens = SourceEnsemble::random_sign(10, 2, 6, 4, SourceMode::FixedK, None, 1)?;
    let e = analytic_entropies(&ens, 6)?;
    println!("\nn = 10, k = 2, m = 6, R = 4 (fixed support size)");
    println!("{e:#?}");
    Ok(())
}

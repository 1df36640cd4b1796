//! Butterfly network: max-flow per receiver, random linear network coding
//! invertibility by field size, and end-to-end SDCIC recovery at both sinks.
//!
//!     cargo run --release --example multicast_butterfly

use csnet::multicast::{
    max_flow, multicast_trials, rlnc_invertibility, MulticastConfig, NetworkGraph,
};
use csnet::sdc::ActivePolicy;
use csnet::source_model::SourceEnsemble;

fn main() -> csnet::Result<()> {
    let g = NetworkGraph::butterfly();
    for &t in g.receivers() {
        println!("receiver {t}: max-flow {}", max_flow(&g, g.sources(), t)?.value);
    }
    println!("\n{:>3} {:>22}", "q", "invertible per receiver");
    for q in [1, 2, 4, 8] {
        let p = rlnc_invertibility(&g, q, 500, 1)?;
        println!("{q:>3} {:>22}", format!("{p:.3?}"));
    }

    let ens = SourceEnsemble::harmonic(2, 1)?;
    let outs = multicast_trials(
        &ens,
        &g,
        &ActivePolicy::Fixed(vec![0, 1]),
        200,
        1,
        &MulticastConfig::default(),
    )?;
    let ok = outs.iter().filter(|o| o.all_succeeded()).count();
    println!("\nharmonic source, GF(256): both receivers recover in {ok}/200 trials");
    Ok(())
}

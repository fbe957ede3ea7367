//! Exact terminal distribution and influence on a three-node chain.
//!
//! ```bash
//! cargo run --example exact_influence
//! ```

use threshold_influence::diffusion::StagePlan;
use threshold_influence::influence::exact_sigma;
use threshold_influence::network::{load_network_file, LoadOptions, WeightFunction};

fn main() -> threshold_influence::Result<()> {
    let net = load_network_file(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/chain.json"), LoadOptions::default())?;
    let seeds = net.parse_set("a")?;
    let res = exact_sigma(&net, &StagePlan::single(seeds), &WeightFunction::Cardinality)?;
    for (set, p) in &res.distribution {
        println!("{:<10} {p}", net.format_set(set));
    }
    println!("sigma = {}", res.sigma);
    Ok(())
}

//! Threshold activations as cascades and back, and an independent cascade run
//! through the threshold machinery.
//!
//! ```bash
//! cargo run --example cascade_equivalence
//! ```

use threshold_influence::cascade::{
    cascade_to_threshold, check_decreasing, exact_cascade_distribution, threshold_to_cascade, IndependentCascade,
};
use threshold_influence::diffusion::StagePlan;
use threshold_influence::influence::{total_variation, ExactOracle};
use threshold_influence::network::{load_network_file, LoadOptions};
use threshold_influence::NodeSet;

fn main() -> threshold_influence::Result<()> {
    let net = load_network_file(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/diamond.json"), LoadOptions::default())?;
    let spec = threshold_to_cascade(&net)?;
    let t = net.id("t").unwrap();
    for (i, &w) in spec.node(t).neighbors.iter().enumerate() {
        println!("p_t({}, {{}}) = {:.3}", net.label(w), spec.prob(t, i, 0));
    }
    match check_decreasing(&spec) {
        None => println!("cascade is decreasing"),
        Some(v) => println!("not decreasing at {}: {v:?}", net.label(v.node)),
    }
    let seeds = net.parse_set("s")?;
    let cascade = exact_cascade_distribution(&spec, &seeds, 12)?;
    let threshold = ExactOracle::new(&net)?.distribution(&StagePlan::single(seeds))?;
    println!("tv(cascade, threshold) = {:.2e}", total_variation(&cascade, &threshold));

    let labels = ["a", "b", "c"].map(String::from).to_vec();
    let ic = IndependentCascade::new(labels, vec![(0, 1, 0.6), (0, 2, 0.3), (1, 2, 0.5)])?;
    let as_threshold = cascade_to_threshold(&ic.to_cascade_spec()?)?;
    let c = as_threshold.id("c").unwrap();
    println!("independent cascade: f_c({{a,b}}) = {}", as_threshold.eval_activation(c, &NodeSet::from_ids(3, [0, 1])));
    Ok(())
}

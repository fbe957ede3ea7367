//! Non-uniform thresholds: composing each activation with a threshold cdf.
//!
//! ```bash
//! cargo run --example threshold_distributions
//! ```

use threshold_influence::diffusion::{compose_cdfs, StagePlan};
use threshold_influence::influence::exact_sigma;
use threshold_influence::network::{load_network_file, LoadOptions, ThresholdCdf};

fn main() -> threshold_influence::Result<()> {
    let net = load_network_file(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/star.json"), LoadOptions::default())?;
    let plan = StagePlan::single(net.parse_set("hub")?);
    let w = net.weight().clone();
    println!("uniform thresholds: sigma = {:.4}", exact_sigma(&net, &plan, &w)?.sigma);

    // F(x) = x^p: p < 1 makes low thresholds likelier, p > 1 high ones
    for p in [0.5, 2.0] {
        let cdf = ThresholdCdf::sampled(|x: f64| x.powf(p), 32)?;
        let composed = compose_cdfs(&net, &vec![cdf; net.n()])?;
        println!("F(x) = x^{p}: sigma = {:.4}", exact_sigma(&composed, &plan, &w)?.sigma);
    }
    Ok(())
}

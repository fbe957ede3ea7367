//! Monte Carlo influence with a Hoeffding confidence radius, compared with the
//! exact value.
//!
//! ```bash
//! cargo run --release --example monte_carlo
//! ```

use threshold_influence::diffusion::StagePlan;
use threshold_influence::influence::{estimate_mc, exact_sigma, required_replicates};
use threshold_influence::network::{load_network_file, LoadOptions};

fn main() -> threshold_influence::Result<()> {
    let net = load_network_file(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/star.json"), LoadOptions::default())?;
    let plan = StagePlan::single(net.parse_set("hub")?);
    let w = net.weight().clone();

    let exact = exact_sigma(&net, &plan, &w)?.sigma;
    for epsilon in [0.1, 0.05, 0.02] {
        let replicates = required_replicates(w.range(net.n()), epsilon * w.range(net.n()), 0.95)?;
        let est = estimate_mc(&net, &plan, &w, replicates, 0.95, 7)?;
        println!(
            "eps {epsilon:<5} R {replicates:>6}  {:.4} ± {:.4}  (exact {exact:.4}, error {:.4})",
            est.mean,
            est.half_width,
            (est.mean - exact).abs()
        );
    }
    Ok(())
}

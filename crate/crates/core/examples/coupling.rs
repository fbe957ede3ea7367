//! The four coupled processes behind submodularity of influence, checked on
//! sampled thresholds and on a full threshold grid.
//!
//! ```bash
//! cargo run --release --example coupling
//! ```

use threshold_influence::coupling::{run_coupled, verify_grid, verify_trace};
use threshold_influence::network::{load_network_file, LoadOptions};
use threshold_influence::rng::replicate_rng;

fn main() -> threshold_influence::Result<()> {
    let net = load_network_file(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/diamond.json"), LoadOptions::default())?;
    let (a, b) = (net.parse_set("s,w")?, net.parse_set("u,t")?);

    let trace = run_coupled(&net, &a, &b, &mut replicate_rng(1, 0))?;
    let (second, third) = trace.phase_starts();
    println!("block {}, phases start at 0, {second}, {third}", trace.block);
    for t in 0..trace.steps() {
        println!(
            "t={t:<2} A={:<12} B={:<12} C={:<12} D={}",
            net.format_set(&trace.a[t]),
            net.format_set(&trace.b[t]),
            net.format_set(&trace.c[t]),
            net.format_set(&trace.d[t])
        );
    }
    println!("invariants hold: {}", verify_trace(&trace, &net)?.holds());

    let mut bad = 0;
    for i in 0..10_000 {
        let trace = run_coupled(&net, &a, &b, &mut replicate_rng(2, i))?;
        bad += usize::from(!verify_trace(&trace, &net)?.holds());
    }
    println!("10000 sampled traces, {bad} violations");

    let grid = verify_grid(&net, &a, &b, 0.01)?;
    println!("grid: {} distinct threshold vectors, {} violations", grid.traces, grid.violations);
    Ok(())
}

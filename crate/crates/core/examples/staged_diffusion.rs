//! Seeding in stages with shared thresholds, plus the antisense final phase.
//! Both leave the terminal distribution unchanged.
//!
//! ```bash
//! cargo run --release --example staged_diffusion
//! ```

use threshold_influence::diffusion::{run, run_antisense, sample_thresholds, StagePlan};
use threshold_influence::influence::{empirical_distribution, total_variation, ExactOracle};
use threshold_influence::network::{load_network_file, LoadOptions};
use threshold_influence::rng::replicate_rng;

fn main() -> threshold_influence::Result<()> {
    let net = load_network_file(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/diamond.json"), LoadOptions::default())?;
    let (s, u) = (net.parse_set("s")?, net.parse_set("u")?);

    // one threshold draw, two ways of seeding
    let th = sample_thresholds(net.n(), &mut replicate_rng(3, 0));
    let direct = run(&net, &StagePlan::single(s.union(&u)), &th)?;
    let staged = run(&net, &StagePlan::staged(vec![s.clone(), u.clone()]), &th)?;
    println!("direct trajectory: {:?}", direct.sets.iter().map(|x| net.format_set(x)).collect::<Vec<_>>());
    println!("staged trajectory: {:?}", staged.sets.iter().map(|x| net.format_set(x)).collect::<Vec<_>>());
    let anti = run_antisense(&net, &StagePlan::staged(vec![s.clone()]).with_tail(u.clone()), &th)?;
    println!("antisense terminal: {}", net.format_set(anti.terminal()));

    let oracle = ExactOracle::new(&net)?;
    let exact_direct = oracle.distribution(&StagePlan::single(s.union(&u)))?;
    let exact_staged = oracle.distribution(&StagePlan::staged(vec![s.clone(), u.clone()]))?;
    println!("exact tv(direct, staged) = {:.2e}", total_variation(&exact_direct, &exact_staged));

    let sampled: std::collections::BTreeMap<u64, f64> =
        empirical_distribution(&net, &StagePlan::staged(vec![s]).with_tail(u), 200_000, 1)?
            .into_iter()
            .map(|(k, p)| (k.to_mask(), p))
            .collect();
    println!("sampled tv(antisense, exact) = {:.4}", total_variation(&sampled, &exact_direct));
    Ok(())
}

//! Greedy seed selection against the exhaustive optimum and simple
//! centrality heuristics, on a random network.
//!
//! ```bash
//! cargo run --release --example greedy
//! ```

use threshold_influence::generate::{random_network, TableKind};
use threshold_influence::maximize::{
    curve_csv, exhaustive_opt, greedy, influence_curve, Evaluator, Method, DEFAULT_EXHAUSTIVE_BUDGET,
};
use threshold_influence::network::WeightFunction;
use threshold_influence::rng::replicate_rng;

fn main() -> threshold_influence::Result<()> {
    let mut rng = replicate_rng(2024, 0);
    let net = random_network(10, 3, TableKind::Submodular, &mut rng)?;
    let w = WeightFunction::Cardinality;

    for k in 1..=3 {
        let g = greedy(&net, &w, k, Evaluator::Exact)?;
        let opt = exhaustive_opt(&net, &w, k, DEFAULT_EXHAUSTIVE_BUDGET)?;
        let mc = greedy(&net, &w, k, Evaluator::MonteCarlo { replicates: 2_000, confidence: 0.95, seed: 5 })?;
        println!(
            "k={k} greedy {:?} {:.4} | optimum {:?} {:.4} | ratio {:.3} | greedy-mc {:?} {:.3} ± {:.3}",
            g.chosen.iter().map(|&v| net.label(v)).collect::<Vec<_>>(),
            g.value,
            opt.chosen.iter().map(|&v| net.label(v)).collect::<Vec<_>>(),
            opt.value,
            g.value / opt.value,
            mc.chosen.iter().map(|&v| net.label(v)).collect::<Vec<_>>(),
            mc.value,
            mc.half_width
        );
    }

    let methods = [Method::GreedyExact, Method::Degree, Method::Distance, Method::Random];
    let rows = influence_curve(&net, &w, 5, &methods, Evaluator::Exact, &mut rng)?;
    print!("{}", curve_csv(&rows));
    Ok(())
}

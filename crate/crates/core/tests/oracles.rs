mod common;

use std::collections::BTreeMap;

use rayon::prelude::*;
use threshold_influence::cascade::{
    cascade_to_threshold, exact_cascade_distribution, run_cascade, run_live_edge_ic, threshold_to_cascade,
    IndependentCascade,
};
use threshold_influence::coupling::run_coupled;
use threshold_influence::diffusion::{run_lazy, StagePlan};
use threshold_influence::generate::TableKind;
use threshold_influence::influence::{empirical_distribution, estimate_mc, total_variation, ExactOracle};
use threshold_influence::network::WeightFunction;
use threshold_influence::rng::replicate_rng;
use threshold_influence::NodeSet;

use common::*;

#[test]
fn need_to_know_oracle_matches_threshold_cells() {
    let mut nets: Vec<_> = SUBMODULAR_FIXTURES.iter().map(|f| fixture(f)).collect();
    nets.push(fixture("and.json"));
    nets.extend(random_networks(25, 2..=5, 2, TableKind::Submodular, 1));
    nets.extend(random_networks(15, 2..=5, 2, TableKind::Monotone, 2));
    for net in &nets {
        if eager_cell_count(net, false) > 200_000 {
            continue;
        }
        let oracle = ExactOracle::new(net).unwrap();
        for mask in 0..1u64 << net.n() {
            let plan = StagePlan::single(NodeSet::from_mask(net.n(), mask));
            let lazy = oracle.distribution(&plan).unwrap();
            let eager = eager_cell_distribution(net, &plan);
            let tv = total_variation(&lazy, &eager);
            assert!(tv <= 1e-9, "seeds {mask:b}: tv {tv}\n{lazy:?}\n{eager:?}");
        }
    }
}

#[test]
fn antisense_phase_matches_standard_exactly() {
    let mut nets: Vec<_> = SUBMODULAR_FIXTURES.iter().map(|f| fixture(f)).collect();
    nets.extend(random_networks(20, 2..=4, 2, TableKind::Submodular, 3));
    nets.push(fixture("and.json"));
    let mut checked = 0;
    for net in &nets {
        if eager_cell_count(net, true) > 200_000 {
            continue;
        }
        let n = net.n();
        for s in 0..1u64 << n {
            // tails disjoint from s
            let rest = !s & ((1u64 << n) - 1);
            let mut t = rest;
            loop {
                let s_set = NodeSet::from_mask(n, s);
                let t_set = NodeSet::from_mask(n, t);
                let anti =
                    eager_cell_distribution(net, &StagePlan::staged(vec![s_set.clone()]).with_tail(t_set.clone()));
                let standard =
                    ExactOracle::new(net).unwrap().distribution(&StagePlan::staged(vec![s_set, t_set])).unwrap();
                let tv = total_variation(&anti, &standard);
                assert!(tv <= 1e-9, "S={s:b} T={t:b}: tv {tv}");
                checked += 1;
                if t == 0 {
                    break;
                }
                t = (t - 1) & rest;
            }
        }
    }
    assert!(checked > 100);
}

#[test]
fn lazy_runs_follow_the_exact_distribution() {
    let net = fixture("diamond.json");
    let seeds = net.parse_set("s").unwrap();
    let plan = StagePlan::single(seeds);
    let exact = ExactOracle::new(&net).unwrap().distribution(&plan).unwrap();
    let replicates = 400_000u64;
    let counts = (0..replicates)
        .into_par_iter()
        .map(|i| run_lazy(&net, &plan, &mut replicate_rng(21, i)).unwrap().terminal().to_mask())
        .fold(BTreeMap::new, |mut acc: BTreeMap<u64, f64>, m| {
            *acc.entry(m).or_insert(0.0) += 1.0;
            acc
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (k, c) in b {
                *a.entry(k).or_insert(0.0) += c;
            }
            a
        });
    let empirical: BTreeMap<u64, f64> = counts.into_iter().map(|(k, c)| (k, c / replicates as f64)).collect();
    let tv = total_variation(&exact, &empirical);
    assert!(tv <= 0.01, "tv {tv}");
}

#[test]
fn eager_monte_carlo_follows_the_exact_distribution() {
    for name in ["chain.json", "diamond.json", "star.json"] {
        let net = fixture(name);
        let plan = StagePlan::single(NodeSet::from_ids(net.n(), [0]));
        let exact = ExactOracle::new(&net).unwrap().distribution(&plan).unwrap();
        let empirical = to_masks(&empirical_distribution(&net, &plan, 1_000_000, 5).unwrap());
        let tv = total_variation(&exact, &empirical);
        assert!(tv <= 0.01, "{name}: tv {tv}");
    }
}

#[test]
fn hoeffding_intervals_cover_the_exact_value() {
    let nets: Vec<_> = ["chain.json", "diamond.json", "star.json"].iter().map(|f| fixture(f)).collect();
    let mut covered = 0;
    let trials = 100;
    for trial in 0..trials {
        let net = &nets[trial % nets.len()];
        let plan = StagePlan::single(NodeSet::from_ids(net.n(), [0]));
        let w = net.weight().clone();
        let exact = ExactOracle::new(net).unwrap().evaluate(&plan, &w).unwrap().sigma;
        let est = estimate_mc(net, &plan, &w, 2_000, 0.95, trial as u64).unwrap();
        if (est.mean - exact).abs() <= est.half_width {
            covered += 1;
        }
    }
    assert!(covered >= 95, "covered {covered} of {trials}");
}

#[test]
fn cascade_simulation_matches_threshold_oracle() {
    let mut nets: Vec<_> = SUBMODULAR_FIXTURES.iter().map(|f| fixture(f)).collect();
    nets.push(fixture("and.json"));
    nets.extend(random_networks(20, 2..=5, 3, TableKind::Submodular, 4));
    nets.extend(random_networks(20, 2..=5, 3, TableKind::Monotone, 5));
    for net in &nets {
        let spec = threshold_to_cascade(net).unwrap();
        let oracle = ExactOracle::new(net).unwrap();
        for mask in 0..1u64 << net.n() {
            let seeds = NodeSet::from_mask(net.n(), mask);
            let cascade = exact_cascade_distribution(&spec, &seeds, 12).unwrap();
            let threshold = oracle.distribution(&StagePlan::single(seeds)).unwrap();
            let tv = total_variation(&cascade, &threshold);
            assert!(tv <= 1e-9, "seeds {mask:b}: tv {tv}");
        }
    }
}

#[test]
fn cascade_monte_carlo_matches_exact_enumeration() {
    let net = fixture("diamond.json");
    let spec = threshold_to_cascade(&net).unwrap();
    let seeds = NodeSet::from_ids(4, [0]);
    let exact = exact_cascade_distribution(&spec, &seeds, 12).unwrap();
    let replicates = 300_000u64;
    let mut counts: BTreeMap<u64, f64> = BTreeMap::new();
    for i in 0..replicates {
        *counts.entry(run_cascade(&spec, &seeds, &mut replicate_rng(8, i)).to_mask()).or_insert(0.0) += 1.0;
    }
    counts.values_mut().for_each(|c| *c /= replicates as f64);
    assert!(total_variation(&exact, &counts) <= 0.01);
}

fn random_ic(n: usize, edges: usize, seed: u64) -> IndependentCascade {
    use rand::Rng;
    let mut rng = replicate_rng(seed, 0);
    let mut list = Vec::new();
    while list.len() < edges {
        let (w, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if w != v && !list.iter().any(|&(a, b, _)| (a, b) == (w, v)) {
            list.push((w, v, rng.gen::<f64>()));
        }
    }
    IndependentCascade::new((0..n).map(|i| format!("n{i}")).collect(), list).unwrap()
}

#[test]
fn live_edge_and_sequential_ic_agree() {
    for seed in 0..15u64 {
        let n = 3 + (seed % 3) as usize;
        let ic = random_ic(n, n + 2, seed);
        let spec = ic.to_cascade_spec().unwrap();
        let net = cascade_to_threshold(&spec).unwrap();
        let oracle = ExactOracle::new(&net).unwrap();
        for mask in 0..1u64 << n {
            let seeds = NodeSet::from_mask(n, mask);
            let live = live_edge_distribution(&ic, &seeds);
            let sequential = exact_cascade_distribution(&spec, &seeds, 12).unwrap();
            let threshold = oracle.distribution(&StagePlan::single(seeds)).unwrap();
            assert!(total_variation(&live, &sequential) <= 1e-9);
            assert!(total_variation(&live, &threshold) <= 1e-9);
        }
    }
}

#[test]
fn live_edge_sampler_matches_enumeration() {
    let ic = random_ic(4, 6, 99);
    let seeds = NodeSet::from_ids(4, [0]);
    let exact = live_edge_distribution(&ic, &seeds);
    let replicates = 200_000u64;
    let mut counts: BTreeMap<u64, f64> = BTreeMap::new();
    for i in 0..replicates {
        *counts.entry(run_live_edge_ic(&ic, &seeds, &mut replicate_rng(2, i)).to_mask()).or_insert(0.0) += 1.0;
    }
    counts.values_mut().for_each(|c| *c /= replicates as f64);
    assert!(total_variation(&exact, &counts) <= 0.01);
}

#[test]
fn coupled_components_have_the_right_marginals() {
    let net = fixture("diamond.json");
    let n = net.n();
    let (a, b) = (net.parse_set("s,w").unwrap(), net.parse_set("u,t").unwrap());
    let oracle = ExactOracle::new(&net).unwrap();
    let exact = |s: &NodeSet| oracle.distribution(&StagePlan::single(s.clone())).unwrap();
    let targets = [exact(&a), exact(&b), exact(&a.intersection(&b)), exact(&a.union(&b))];

    let replicates = 1_000_000u64;
    let mut counts: Vec<BTreeMap<u64, f64>> = vec![BTreeMap::new(); 4];
    let mut sigma = [0.0f64; 4];
    let w = WeightFunction::Cardinality;
    for i in 0..replicates {
        let trace = run_coupled(&net, &a, &b, &mut replicate_rng(77, i)).unwrap();
        for (j, seq) in [&trace.a, &trace.b, &trace.c, &trace.d].into_iter().enumerate() {
            let last = seq.last().unwrap();
            *counts[j].entry(last.to_mask()).or_insert(0.0) += 1.0;
            sigma[j] += w.eval(last);
        }
    }
    for (j, c) in counts.iter_mut().enumerate() {
        c.values_mut().for_each(|x| *x /= replicates as f64);
        let tv = total_variation(&targets[j], c);
        assert!(tv <= 0.01, "component {j}: tv {tv}");
    }
    // σ(A) + σ(B) >= σ(A∩B) + σ(A∪B), pathwise on average
    let s = sigma.map(|x| x / replicates as f64);
    assert!(s[0] + s[1] >= s[2] + s[3] - 1e-12, "{s:?}");
    assert_eq!(n, 4);
}

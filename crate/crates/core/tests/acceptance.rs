//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

mod common;

use std::collections::BTreeMap;
use std::process::Command;
use std::time::Instant;

use rand::Rng;
use threshold_influence::cascade::{
    cascade_to_threshold, check_decreasing_node, exact_cascade_distribution, max_prob_difference, threshold_to_cascade,
};
use threshold_influence::coupling::{
    build_counterexample, run_coupled, verify_grid, verify_trace, SetFunctionDocument,
};
use threshold_influence::diffusion::StagePlan;
use threshold_influence::generate::{random_weight, TableKind};
use threshold_influence::influence::{empirical_distribution, required_replicates, total_variation, ExactOracle};
use threshold_influence::maximize::{exhaustive_opt, greedy, Evaluator, DEFAULT_EXHAUSTIVE_BUDGET};
use threshold_influence::network::{check_properties, check_set_function, Activation, SocialNetwork, WeightFunction};
use threshold_influence::rng::replicate_rng;
use threshold_influence::NodeSet;

use common::*;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn criterion_1() -> Outcome {
    let net = fixture("chain.json");
    let plan = StagePlan::single(net.parse_set("a").map_err(err)?);
    let res = ExactOracle::new(&net).map_err(err)?.evaluate(&plan, &WeightFunction::Cardinality).map_err(err)?;
    let want: BTreeMap<u64, f64> = [(0b001, 0.5), (0b011, 0.25), (0b111, 0.25)].into();
    let got = res.as_map();
    ensure((res.sigma - 1.75).abs() <= 1e-12, || format!("sigma {}", res.sigma))?;
    ensure(got.len() == 3 && want.iter().all(|(k, p)| (got[k] - p).abs() <= 1e-12), || format!("{got:?}"))?;
    Ok(format!("sigma = {}", res.sigma))
}

fn criterion_2() -> Outcome {
    let nets = random_networks(220, 2..=6, 3, TableKind::Submodular, 2002);
    let mut worst = f64::INFINITY;
    for (i, net) in nets.iter().enumerate() {
        let oracle = ExactOracle::new(net).map_err(err)?;
        let weights = [WeightFunction::Cardinality, random_weight(net.n(), &mut replicate_rng(2002, i as u64 + 1))];
        for w in &weights {
            let sigma = oracle.sigma_table(w).map_err(err)?;
            let report = check_set_function(net.n(), |m| sigma[m as usize]).map_err(err)?;
            ensure(report.is_monotone() && report.is_submodular(), || format!("network {i}: {report:?}"))?;
            // smallest slack over all pairs
            let n = net.n();
            for s in 0..1usize << n {
                for t in 0..1usize << n {
                    worst = worst.min(sigma[s] + sigma[t] - sigma[s & t] - sigma[s | t]);
                }
            }
        }
    }
    ensure(worst >= -1e-9, || format!("slack {worst}"))?;
    Ok(format!("{} networks x 2 weights, min slack {worst:.3e}", nets.len()))
}

fn criterion_3() -> Outcome {
    let nets = random_networks(200, 2..=8, 3, TableKind::Submodular, 3003);
    let mut traces = 0u64;
    for (i, net) in nets.iter().enumerate() {
        let n = net.n();
        let full = (1u64 << n) - 1;
        let mut rng = replicate_rng(3003, 1_000 + i as u64);
        for j in 0..50 {
            let a = NodeSet::from_mask(n, rng.gen::<u64>() & full);
            let b = NodeSet::from_mask(n, rng.gen::<u64>() & full);
            let trace = run_coupled(net, &a, &b, &mut replicate_rng(3003 + i as u64, j)).map_err(err)?;
            let report = verify_trace(&trace, net).map_err(err)?;
            ensure(report.holds(), || format!("network {i} trace {j}: {:?}", report.first_violation))?;
            traces += 1;
        }
    }
    let mut grid_nets: Vec<SocialNetwork> = ["chain.json", "diamond.json"].iter().map(|f| fixture(f)).collect();
    grid_nets.extend(random_networks(4, 3..=4, 2, TableKind::Submodular, 3004));
    let mut grid_traces = 0;
    for net in &grid_nets {
        let n = net.n();
        let full = (1u64 << n) - 1;
        for (a, b) in [(0b0101 & full, 0b0011 & full), (0b0001, full & !1), (0b0110 & full, 0b1100 & full)] {
            let report = verify_grid(net, &NodeSet::from_mask(n, a), &NodeSet::from_mask(n, b), 1e-2).map_err(err)?;
            ensure(report.violations == 0, || format!("grid: {:?}", report.first_violation))?;
            grid_traces += report.traces;
        }
    }
    Ok(format!("{traces} sampled traces, {grid_traces} distinct grid points, 0 violations"))
}

fn criterion_4() -> Outcome {
    let mut nets: Vec<SocialNetwork> = ["chain.json", "diamond.json", "and.json"].iter().map(|f| fixture(f)).collect();
    nets.extend(random_networks(47, 2..=5, 3, TableKind::Submodular, 4004));
    let mut worst = 0.0f64;
    let mut plans = 0;
    let mut cell_checked = 0;
    for net in &nets {
        let n = net.n();
        let oracle = ExactOracle::new(net).map_err(err)?;
        let cheap = eager_cell_count(net, false) <= 5_000;
        for s in 0..1u64 << n {
            let seeds = NodeSet::from_mask(n, s);
            let direct = oracle.distribution(&StagePlan::single(seeds.clone())).map_err(err)?;
            for stages in stage_assignments(&seeds, 3) {
                let plan = StagePlan::staged(stages);
                worst = worst.max(total_variation(&direct, &oracle.distribution(&plan).map_err(err)?));
                if cheap && s.count_ones() <= 3 {
                    worst = worst.max(total_variation(&direct, &eager_cell_distribution(net, &plan)));
                    cell_checked += 1;
                }
                plans += 1;
            }
        }
    }
    ensure(worst <= 1e-9, || format!("tv {worst}"))?;
    Ok(format!(
        "{} networks, {plans} staged plans ({cell_checked} also by cell enumeration), max tv {worst:.1e}",
        nets.len()
    ))
}

fn criterion_5() -> Outcome {
    let mut nets: Vec<SocialNetwork> = ["chain.json", "diamond.json", "and.json"].iter().map(|f| fixture(f)).collect();
    nets.extend(random_networks(17, 3..=5, 3, TableKind::Submodular, 5005));
    let replicates = 1_000_000;
    let mut worst = 0.0f64;
    for (i, net) in nets.iter().enumerate() {
        let n = net.n();
        let mut rng = replicate_rng(5005, 100 + i as u64);
        let s = rng.gen_range(1..1u64 << n);
        let rest = !s & ((1u64 << n) - 1);
        let t = if rest == 0 { 0 } else { rest & rng.gen_range(1..=rest).max(1) };
        let (s, t) = (NodeSet::from_mask(n, s), NodeSet::from_mask(n, t));
        let anti = empirical_distribution(
            net,
            &StagePlan::staged(vec![s.clone()]).with_tail(t.clone()),
            replicates,
            2 * i as u64,
        )
        .map_err(err)?;
        let standard =
            empirical_distribution(net, &StagePlan::staged(vec![s, t]), replicates, 2 * i as u64 + 1).map_err(err)?;
        let tv = total_variation(&anti, &standard);
        ensure(tv <= 0.01, || format!("network {i}: tv {tv}"))?;
        worst = worst.max(tv);
    }
    Ok(format!("{} networks x 2 x {replicates} runs, max tv {worst:.4}", nets.len()))
}

fn criterion_6() -> Outcome {
    let mut nets: Vec<SocialNetwork> = SUBMODULAR_FIXTURES.iter().map(|f| fixture(f)).collect();
    nets.push(fixture("and.json"));
    nets.extend(random_networks(30, 2..=5, 4, TableKind::Submodular, 6006));
    nets.extend(random_networks(30, 2..=5, 4, TableKind::NormalizedSubmodular, 6007));
    nets.extend(random_networks(30, 2..=5, 4, TableKind::Monotone, 6008));
    let (mut round, mut dist, mut equiv) = (0.0f64, 0.0f64, 0);
    for (i, net) in nets.iter().enumerate() {
        let n = net.n();
        let spec = threshold_to_cascade(net).map_err(err)?;
        let back = cascade_to_threshold(&spec).map_err(err)?;
        for m in 0..1u64 << n {
            let set = NodeSet::from_mask(n, m);
            for v in 0..n {
                round = round.max((net.eval_activation(v, &set) - back.eval_activation(v, &set)).abs());
            }
        }
        round =
            round.max(max_prob_difference(&spec, &threshold_to_cascade(&back).map_err(err)?).unwrap_or(f64::INFINITY));
        if n <= 5 {
            let oracle = ExactOracle::new(net).map_err(err)?;
            for m in 0..1u64 << n {
                let seeds = NodeSet::from_mask(n, m);
                let c = exact_cascade_distribution(&spec, &seeds, 12).map_err(err)?;
                let t = oracle.distribution(&StagePlan::single(seeds)).map_err(err)?;
                dist = dist.max(total_variation(&c, &t));
            }
        }
        for v in 0..n {
            let f = net.activation(v);
            if matches!(f, Activation::Table { .. }) && f.neighbors().len() <= 4 {
                let normalized = check_properties(f).map_err(err)?.is_normalized_submodular();
                let decreasing = check_decreasing_node(&spec, v).is_none();
                ensure(normalized == decreasing, || {
                    format!("network {i} node {v}: normalized {normalized}, decreasing {decreasing}")
                })?;
                equiv += 1;
            }
        }
    }
    ensure(round <= 1e-9, || format!("round trip error {round}"))?;
    ensure(dist <= 1e-9, || format!("distribution tv {dist}"))?;
    Ok(format!("{} networks, round trip {round:.1e}, tv {dist:.1e}, {equiv} tables agree", nets.len()))
}

fn criterion_7() -> Outcome {
    let f = SetFunctionDocument { nodes: vec!["x".into(), "y".into()], values: vec![0.0, 0.0, 0.0, 1.0] };
    let ce = build_counterexample(&f, &["x".into()], &["y".into()]).map_err(err)?;
    let (lhs, rhs) = (ce.sigma_a + ce.sigma_b, ce.sigma_intersection + ce.sigma_union);
    ensure(lhs == 2.0 && rhs == 3.0, || format!("{lhs} vs {rhs}"))?;
    let out = Command::new(env!("CARGO_BIN_EXE_gtm"))
        .args(["verify", "--check", "submodular-global", "--network"])
        .arg(fixture_path("and.json"))
        .output()
        .map_err(err)?;
    ensure(out.status.code() == Some(2), || format!("exit {:?}", out.status.code()))?;
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).map_err(err)?;
    ensure(report["witness"].is_object(), || "no witness".into())?;
    Ok(format!("sigma(A)+sigma(B) = {lhs} < {rhs}, CLI exit 2 with witness {}", report["witness"]["A"]))
}

fn criterion_8() -> Outcome {
    let mut nets: Vec<SocialNetwork> = SUBMODULAR_FIXTURES.iter().map(|f| fixture(f)).collect();
    nets.extend(random_networks(100, 4..=10, 3, TableKind::Submodular, 8008));
    let ratio = 1.0 - (-1.0f64).exp();
    let (mut worst, mut checked) = (f64::INFINITY, 0);
    let (mut mc_trials, mut mc_good) = (0, 0);
    for (i, net) in nets.iter().enumerate() {
        let w = WeightFunction::Cardinality;
        let oracle = ExactOracle::new(net).map_err(err)?;
        let replicates = required_replicates(w.range(net.n()), 0.05 * w.range(net.n()), 0.95).map_err(err)?;
        for k in 1..=3.min(net.n()) {
            let opt = exhaustive_opt(net, &w, k, DEFAULT_EXHAUSTIVE_BUDGET).map_err(err)?.value;
            let g = greedy(net, &w, k, Evaluator::Exact).map_err(err)?.value;
            ensure(g >= ratio * opt - 1e-9, || format!("network {i} k={k}: greedy {g} opt {opt}"))?;
            worst = worst.min(g / opt);
            checked += 1;
            let eval = Evaluator::MonteCarlo { replicates, confidence: 0.95, seed: i as u64 * 10 + k as u64 };
            let chosen = greedy(net, &w, k, eval).map_err(err)?.chosen_set(net.n());
            let value = oracle.sigma_mask(chosen.to_mask(), &w).map_err(err)?;
            mc_trials += 1;
            if value >= (ratio - 0.1) * opt - 1e-9 {
                mc_good += 1;
            }
        }
    }
    let share = mc_good as f64 / mc_trials as f64;
    ensure(share >= 0.95, || format!("greedy-mc met the bound in {mc_good}/{mc_trials}"))?;
    Ok(format!("{checked} (network, k) cases, worst greedy/opt {worst:.4}; greedy-mc ok in {mc_good}/{mc_trials}"))
}

fn criterion_9() -> Outcome {
    let net = fixture_path("star.json");
    let cases: [&[&str]; 4] = [
        &["influence", "--method", "mc", "--replicates", "50000", "--seeds", "hub"],
        &["maximize", "--k", "2", "--method", "greedy-mc", "--epsilon", "0.05"],
        &["curve", "--k-max", "3", "--methods", "greedy-mc,random,distance", "--replicates", "2000"],
        &["verify", "--check", "antisense", "--seeds", "hub", "--tail", "l4", "--replicates", "20000"],
    ];
    for case in cases {
        let run = |workers: &str| {
            Command::new(env!("CARGO_BIN_EXE_gtm"))
                .args(case)
                .arg("--network")
                .arg(&net)
                .args(["--rng-seed", "9", "--workers", workers])
                .output()
                .map(|o| (o.status.code(), o.stdout))
        };
        let first = run("1").map_err(err)?;
        ensure(first.0 == Some(0), || format!("{case:?} exit {:?}", first.0))?;
        for workers in ["1", "2", "4"] {
            ensure(run(workers).map_err(err)? == first, || format!("{case:?} differs with --workers {workers}"))?;
        }
    }
    Ok(format!("{} commands byte-identical across runs and 1/2/4 workers", cases.len()))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("exact oracle golden value", criterion_1),
        ("influence is monotone and submodular", criterion_2),
        ("coupling invariants", criterion_3),
        ("staged seeding keeps the distribution", criterion_4),
        ("antisense phase keeps the distribution", criterion_5),
        ("cascade and threshold models agree", criterion_6),
        ("non-submodular activation breaks submodularity", criterion_7),
        ("greedy approximation guarantee", criterion_8),
        ("reproducible reports", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {name} ({detail}) [{secs:.1}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {detail} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

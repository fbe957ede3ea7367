//! Independent oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, VecDeque};
use std::path::PathBuf;

use threshold_influence::cascade::IndependentCascade;
use threshold_influence::diffusion::{run, run_antisense, StagePlan, ThresholdAssignment};
use threshold_influence::generate::{random_network, TableKind};
use threshold_influence::network::{load_network_file, LoadOptions, SocialNetwork};
use threshold_influence::rng::replicate_rng;
use threshold_influence::NodeSet;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn fixture(name: &str) -> SocialNetwork {
    load_network_file(fixture_path(name), LoadOptions::default()).unwrap()
}

/// Fixture files holding monotone submodular networks.
pub const SUBMODULAR_FIXTURES: &[&str] = &["chain.json", "star.json", "diamond.json"];

/// `count` random networks with `n` drawn from `sizes`.
pub fn random_networks(
    count: usize,
    sizes: std::ops::RangeInclusive<usize>,
    max_degree: usize,
    kind: TableKind,
    seed: u64,
) -> Vec<SocialNetwork> {
    let mut rng = replicate_rng(seed, 0);
    (0..count)
        .map(|_| {
            let n = rand::Rng::gen_range(&mut rng, sizes.clone());
            random_network(n, max_degree, kind, &mut rng).unwrap()
        })
        .collect()
}

/// Partition of `(0, 1]` into cells on which no comparison made by the
/// runners changes outcome, as `(representative, width)` pairs.
fn threshold_cells(net: &SocialNetwork, v: usize, antisense: bool) -> Vec<(f64, f64)> {
    let f = net.activation(v);
    let k = f.neighbors().len();
    let values: Vec<f64> = (0..1u64 << k).map(|m| f.eval_local(m)).collect();
    let mut cuts: Vec<f64> = vec![0.0, 1.0];
    cuts.extend(values.iter().copied());
    if antisense {
        for x in 0..1usize << k {
            for y in (0..1usize << k).filter(|y| y & x == x) {
                cuts.push(1.0 - (values[y] - values[x]));
            }
        }
    }
    cuts.retain(|c| (0.0..=1.0).contains(c));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts.windows(2).map(|w| ((w[0] + w[1]) / 2.0, w[1] - w[0])).filter(|&(_, width)| width > 0.0).collect()
}

/// Exact terminal distribution of the eager process, by enumerating threshold
/// cells and running each representative once.
pub fn eager_cell_distribution(net: &SocialNetwork, plan: &StagePlan) -> BTreeMap<u64, f64> {
    let antisense = plan.tail.is_some();
    let cells: Vec<Vec<(f64, f64)>> = (0..net.n()).map(|v| threshold_cells(net, v, antisense)).collect();
    let total: usize = cells.iter().map(Vec::len).product();
    assert!(total <= 5_000_000, "{total} threshold cells is too many");
    let mut out = BTreeMap::new();
    let mut theta = vec![0.0; net.n()];
    for mut index in 0..total {
        let mut mass = 1.0;
        for (v, c) in cells.iter().enumerate() {
            let (rep, width) = c[index % c.len()];
            index /= c.len();
            theta[v] = rep;
            mass *= width;
        }
        let th = ThresholdAssignment::new(theta.clone()).unwrap();
        let traj = if antisense { run_antisense(net, plan, &th) } else { run(net, plan, &th) }.unwrap();
        *out.entry(traj.terminal().to_mask()).or_insert(0.0) += mass;
    }
    out
}

/// Number of threshold cells [`eager_cell_distribution`] would enumerate.
pub fn eager_cell_count(net: &SocialNetwork, antisense: bool) -> usize {
    (0..net.n()).map(|v| threshold_cells(net, v, antisense).len()).product()
}

/// Exact terminal distribution of an independent cascade by enumerating every
/// live-edge subset.
pub fn live_edge_distribution(ic: &IndependentCascade, seeds: &NodeSet) -> BTreeMap<u64, f64> {
    let edges = ic.edges();
    assert!(edges.len() <= 20);
    let mut out = BTreeMap::new();
    for live in 0..1u64 << edges.len() {
        let mut mass = 1.0;
        let mut adj = vec![Vec::new(); ic.n()];
        for (i, &(w, v, p)) in edges.iter().enumerate() {
            if live >> i & 1 == 1 {
                mass *= p;
                adj[w].push(v);
            } else {
                mass *= 1.0 - p;
            }
        }
        if mass == 0.0 {
            continue;
        }
        let mut reached = seeds.to_mask();
        let mut queue: VecDeque<usize> = seeds.iter().collect();
        while let Some(w) = queue.pop_front() {
            for &v in &adj[w] {
                if reached >> v & 1 == 0 {
                    reached |= 1 << v;
                    queue.push_back(v);
                }
            }
        }
        *out.entry(reached).or_insert(0.0) += mass;
    }
    out
}

pub fn to_masks(dist: &BTreeMap<NodeSet, f64>) -> BTreeMap<u64, f64> {
    dist.iter().map(|(s, p)| (s.to_mask(), *p)).collect()
}

/// Every assignment of `seeds` to `stages` labelled stages (empty stages allowed).
pub fn stage_assignments(seeds: &NodeSet, stages: usize) -> Vec<Vec<NodeSet>> {
    let members: Vec<usize> = seeds.iter().collect();
    let count = stages.pow(members.len() as u32);
    (0..count)
        .map(|mut code| {
            let mut out = vec![NodeSet::empty(seeds.universe()); stages];
            for &v in &members {
                out[code % stages].insert(v);
                code /= stages;
            }
            out
        })
        .collect()
}

//! Seed-set selection.
//!
//! [`greedy`] adds, one node per round, the candidate with the largest
//! estimated `σ_w(S + v)`; ties go to the smallest node id. With the Monte Carlo
//! evaluator every candidate of a round shares the same replicate streams, so
//! candidates are compared on common random numbers.

use std::fmt;

use itertools::Itertools;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diffusion::StagePlan;
use crate::error::{Error, Result};
use crate::influence::{estimate_mc, ExactOracle};
use crate::network::{derive_graph, SocialNetwork, WeightFunction, TOLERANCE};
use crate::rng::derive_seed;
use crate::set::{NodeId, NodeSet};

/// Default cap on the number of subsets [`exhaustive_opt`] may evaluate.
pub const DEFAULT_EXHAUSTIVE_BUDGET: u128 = 1_000_000;

/// How `σ_w` is computed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Evaluator {
    Exact,
    MonteCarlo { replicates: u64, confidence: f64, seed: u64 },
}

impl Evaluator {
    /// Label used in reports.
    pub fn label(&self) -> &'static str {
        match self {
            Evaluator::Exact => "exact",
            Evaluator::MonteCarlo { .. } => "mc",
        }
    }
}

/// Value of one seed set: the estimate and its confidence radius (0 when exact).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Evaluation {
    pub value: f64,
    pub half_width: f64,
}

/// Evaluates many seed sets against one network.
struct Scorer<'a> {
    net: &'a SocialNetwork,
    w: &'a WeightFunction,
    evaluator: Evaluator,
    oracle: Option<ExactOracle<'a>>,
}

impl<'a> Scorer<'a> {
    fn new(net: &'a SocialNetwork, w: &'a WeightFunction, evaluator: Evaluator) -> Result<Self> {
        w.validate(net.n())?;
        let oracle = match evaluator {
            Evaluator::Exact => Some(ExactOracle::new(net)?),
            Evaluator::MonteCarlo { .. } => None,
        };
        Ok(Scorer { net, w, evaluator, oracle })
    }

    /// `σ_w(seeds)`; `stream` selects the Monte Carlo replicate streams.
    fn score(&self, seeds: &NodeSet, stream: u64) -> Result<Evaluation> {
        match (&self.oracle, self.evaluator) {
            (Some(oracle), _) => Ok(Evaluation { value: oracle.sigma_mask(seeds.to_mask(), self.w)?, half_width: 0.0 }),
            (None, Evaluator::MonteCarlo { replicates, confidence, seed }) => {
                let plan = StagePlan::single(seeds.clone());
                let est = estimate_mc(self.net, &plan, self.w, replicates, confidence, derive_seed(seed, &[stream]))?;
                Ok(Evaluation { value: est.mean, half_width: est.half_width })
            }
            (None, Evaluator::Exact) => unreachable!("exact scorer always has an oracle"),
        }
    }
}

/// Selection strategy recorded in a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    GreedyExact,
    GreedyMc,
    Exhaustive,
    Degree,
    Distance,
    Random,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Method::GreedyExact => "greedy-exact",
            Method::GreedyMc => "greedy-mc",
            Method::Exhaustive => "exhaustive",
            Method::Degree => "degree",
            Method::Distance => "distance",
            Method::Random => "random",
        };
        f.write_str(s)
    }
}

/// Centrality heuristics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Heuristic {
    /// Largest out-degree in the influence graph.
    Degree,
    /// Smallest average hop distance to the other nodes (unreachable counts as `n`).
    Distance,
    /// Uniform random subset.
    Random,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaximizationResult {
    /// Seeds in selection order.
    pub chosen: Vec<NodeId>,
    pub value: f64,
    pub half_width: f64,
    /// Per-round increase of the estimated value (greedy only).
    pub gains: Vec<f64>,
    pub method: Method,
    /// Seed sets evaluated.
    pub evaluations: u64,
}

impl MaximizationResult {
    pub fn chosen_set(&self, n: usize) -> NodeSet {
        NodeSet::from_ids(n, self.chosen.iter().copied())
    }
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k > n {
        return Err(Error::TooManySeeds { k, n });
    }
    Ok(())
}

/// Greedy maximization of `σ_w` over seed sets of size `k`.
pub fn greedy(net: &SocialNetwork, w: &WeightFunction, k: usize, evaluator: Evaluator) -> Result<MaximizationResult> {
    let n = net.n();
    check_k(k, n)?;
    let scorer = Scorer::new(net, w, evaluator)?;
    let mut chosen = Vec::with_capacity(k);
    let mut current = net.empty_set();
    let mut value = scorer.score(&current, 0)?;
    let mut evaluations = 1;
    let mut gains = Vec::with_capacity(k);
    for round in 1..=k as u64 {
        let candidates: Vec<NodeId> = (0..n).filter(|&v| !current.contains(v)).collect();
        let scores = candidates
            .par_iter()
            .map(|&v| {
                let mut s = current.clone();
                s.insert(v);
                scorer.score(&s, round)
            })
            .collect::<Result<Vec<_>>>()?;
        evaluations += candidates.len() as u64;
        let mut best = 0;
        for i in 1..scores.len() {
            if scores[i].value > scores[best].value + TOLERANCE {
                best = i;
            }
        }
        let v = candidates[best];
        chosen.push(v);
        current.insert(v);
        // with common random numbers the previous value must come from the same streams
        let base = match evaluator {
            Evaluator::Exact => value.value,
            Evaluator::MonteCarlo { .. } => {
                evaluations += 1;
                let mut prev = current.clone();
                prev.remove(v);
                scorer.score(&prev, round)?.value
            }
        };
        gains.push(scores[best].value - base);
        value = scores[best];
    }
    if let Evaluator::MonteCarlo { .. } = evaluator {
        // fresh streams for the reported value, so selection does not bias it
        value = scorer.score(&current, u64::MAX)?;
        evaluations += 1;
    }
    Ok(MaximizationResult {
        chosen,
        value: value.value,
        half_width: value.half_width,
        gains,
        method: if evaluator == Evaluator::Exact { Method::GreedyExact } else { Method::GreedyMc },
        evaluations,
    })
}

/// Binomial coefficient, saturating.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k) as u128;
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n as u128 - i) / (i + 1);
    }
    acc
}

/// Exact optimum over all `k`-subsets; ties go to the lexicographically
/// smallest id list.
pub fn exhaustive_opt(net: &SocialNetwork, w: &WeightFunction, k: usize, budget: u128) -> Result<MaximizationResult> {
    let n = net.n();
    check_k(k, n)?;
    let needed = binomial(n, k);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    let scorer = Scorer::new(net, w, Evaluator::Exact)?;
    let subsets: Vec<Vec<NodeId>> = (0..n).combinations(k).collect();
    let values = subsets
        .par_iter()
        .map(|ids| scorer.score(&NodeSet::from_ids(n, ids.iter().copied()), 0).map(|e| e.value))
        .collect::<Result<Vec<f64>>>()?;
    let mut best = 0;
    for i in 1..values.len() {
        if values[i] > values[best] + TOLERANCE {
            best = i;
        }
    }
    Ok(MaximizationResult {
        chosen: subsets[best].clone(),
        value: values[best],
        half_width: 0.0,
        gains: Vec::new(),
        method: Method::Exhaustive,
        evaluations: subsets.len() as u64,
    })
}

/// Average hop distance from each node to every other node, with unreachable
/// nodes counted at distance `n`.
pub fn average_distances(net: &SocialNetwork) -> Vec<f64> {
    let graph = derive_graph(net);
    let n = net.n();
    (0..n)
        .map(|s| {
            if n < 2 {
                return 0.0;
            }
            let total: usize =
                graph.distances_from(s).iter().enumerate().filter(|&(v, _)| v != s).map(|(_, d)| d.unwrap_or(n)).sum();
            total as f64 / (n - 1) as f64
        })
        .collect()
}

/// Ranks nodes by a centrality heuristic and evaluates the top `k`.
pub fn heuristic_baseline<R: Rng + ?Sized>(
    net: &SocialNetwork,
    w: &WeightFunction,
    kind: Heuristic,
    k: usize,
    evaluator: Evaluator,
    rng: &mut R,
) -> Result<MaximizationResult> {
    let n = net.n();
    check_k(k, n)?;
    let chosen: Vec<NodeId> = match kind {
        Heuristic::Degree => {
            let graph = derive_graph(net);
            (0..n).sorted_by_key(|&v| (std::cmp::Reverse(graph.out_degree(v)), v)).take(k).collect()
        }
        Heuristic::Distance => {
            let dist = average_distances(net);
            (0..n).sorted_by(|&x, &y| dist[x].total_cmp(&dist[y]).then(x.cmp(&y))).take(k).collect()
        }
        Heuristic::Random => rand::seq::index::sample(rng, n, k).into_iter().sorted().collect(),
    };
    let scorer = Scorer::new(net, w, evaluator)?;
    let value = scorer.score(&NodeSet::from_ids(n, chosen.iter().copied()), 0)?;
    Ok(MaximizationResult {
        chosen,
        value: value.value,
        half_width: value.half_width,
        gains: Vec::new(),
        method: match kind {
            Heuristic::Degree => Method::Degree,
            Heuristic::Distance => Method::Distance,
            Heuristic::Random => Method::Random,
        },
        evaluations: 1,
    })
}

/// One row of an influence-vs-k table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveRow {
    pub k: usize,
    pub method: Method,
    pub value: f64,
    /// Confidence radius; 0 for exact values.
    pub ci: f64,
}

/// Influence of each method's seed set for `k = 0..=k_max`.
///
/// Greedy sets are nested, so one greedy run per method is enough; the other
/// methods are rerun for every `k`.
pub fn influence_curve<R: Rng + ?Sized>(
    net: &SocialNetwork,
    w: &WeightFunction,
    k_max: usize,
    methods: &[Method],
    evaluator: Evaluator,
    rng: &mut R,
) -> Result<Vec<CurveRow>> {
    let n = net.n();
    check_k(k_max, n)?;
    let scorer = Scorer::new(net, w, evaluator)?;
    let mut rows = Vec::new();
    for &method in methods {
        match method {
            Method::GreedyExact | Method::GreedyMc => {
                let eval = if method == Method::GreedyExact { Evaluator::Exact } else { evaluator };
                let run = greedy(net, w, k_max, eval)?;
                for k in 0..=k_max {
                    let set = NodeSet::from_ids(n, run.chosen[..k].iter().copied());
                    let e = scorer.score(&set, u64::MAX)?;
                    rows.push(CurveRow { k, method, value: e.value, ci: e.half_width });
                }
            }
            Method::Exhaustive => {
                for k in 0..=k_max {
                    let best = exhaustive_opt(net, w, k, DEFAULT_EXHAUSTIVE_BUDGET)?;
                    let e = scorer.score(&best.chosen_set(n), u64::MAX)?;
                    rows.push(CurveRow { k, method, value: e.value, ci: e.half_width });
                }
            }
            Method::Degree | Method::Distance | Method::Random => {
                let kind = match method {
                    Method::Degree => Heuristic::Degree,
                    Method::Distance => Heuristic::Distance,
                    _ => Heuristic::Random,
                };
                for k in 0..=k_max {
                    let r = heuristic_baseline(net, w, kind, k, evaluator, rng)?;
                    rows.push(CurveRow { k, method, value: r.value, ci: r.half_width });
                }
            }
        }
    }
    Ok(rows)
}

/// Renders curve rows as CSV with header `k,method,value,ci`.
pub fn curve_csv(rows: &[CurveRow]) -> String {
    let mut out = String::from("k,method,value,ci\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{}\n", r.k, r.method, r.value, r.ci));
    }
    out
}

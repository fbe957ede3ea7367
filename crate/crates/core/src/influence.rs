//! Influence `σ_w(S)`, the expected weight of the terminal active set.
//!
//! [`ExactOracle`] enumerates the need-to-know process exactly. At every step a
//! still-inactive node `v` joins with probability
//! `q_v = (f_v(cur) - f_v(prev)) / (1 - f_v(prev))`, so the state of the process
//! is the pair `(prev, cur)` plus the stage index. Probability mass is pushed
//! forward through these states in a fixed order (stage, |cur|, |prev|, prev,
//! cur); merging on equal states plays the role of memoization.
//!
//! [`estimate_mc`] averages the weight of terminal sets over independent eager
//! runs and reports a Hoeffding confidence radius.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::diffusion::{run, run_antisense, sample_thresholds, StagePlan};
use crate::error::{Error, Result};
use crate::network::{SocialNetwork, WeightFunction};
use crate::rng::replicate_rng;
use crate::set::NodeSet;

/// Default node cap for exact enumeration.
pub const DEFAULT_EXACT_CAP: usize = 14;

/// Exact terminal distribution and influence.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactResult {
    /// Terminal sets with positive probability, ordered by bitmask.
    pub distribution: Vec<(NodeSet, f64)>,
    pub sigma: f64,
}

impl ExactResult {
    pub fn total_mass(&self) -> f64 {
        self.distribution.iter().map(|(_, p)| p).sum()
    }

    pub fn probability_of(&self, set: &NodeSet) -> f64 {
        self.distribution.iter().find(|(s, _)| s == set).map_or(0.0, |(_, p)| *p)
    }

    pub fn as_map(&self) -> BTreeMap<u64, f64> {
        self.distribution.iter().map(|(s, p)| (s.to_mask(), *p)).collect()
    }
}

/// Monte Carlo influence estimate with a Hoeffding radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InfluenceEstimate {
    pub mean: f64,
    pub half_width: f64,
    pub replicates: u64,
    pub confidence: f64,
}

/// Exact evaluator with every activation value tabulated over all `2^n` sets.
#[derive(Debug, Clone)]
pub struct ExactOracle<'a> {
    net: &'a SocialNetwork,
    values: Vec<Vec<f64>>,
}

type StateKey = (usize, u32, u32, u64, u64);

fn state_key(stage: usize, prev: u64, cur: u64) -> StateKey {
    (stage, cur.count_ones(), prev.count_ones(), prev, cur)
}

impl<'a> ExactOracle<'a> {
    pub fn new(net: &'a SocialNetwork) -> Result<Self> {
        Self::with_cap(net, DEFAULT_EXACT_CAP)
    }

    pub fn with_cap(net: &'a SocialNetwork, cap: usize) -> Result<Self> {
        let n = net.n();
        if n > cap.min(30) {
            return Err(Error::DomainTooLarge { size: n, limit: cap.min(30) });
        }
        let values = net
            .activations()
            .iter()
            .map(|f| {
                // map each global mask to the activation's local mask
                let neighbors = f.neighbors();
                (0..1u64 << n)
                    .map(|mask| {
                        let local = neighbors
                            .iter()
                            .enumerate()
                            .filter(|(_, &w)| mask >> w & 1 == 1)
                            .fold(0u64, |m, (i, _)| m | 1 << i);
                        f.eval_local(local)
                    })
                    .collect()
            })
            .collect();
        Ok(ExactOracle { net, values })
    }

    pub fn network(&self) -> &SocialNetwork {
        self.net
    }

    /// `f_v` at the set encoded by `mask`.
    pub fn activation_value(&self, v: usize, mask: u64) -> f64 {
        self.values[v][mask as usize]
    }

    /// Terminal distribution of a staged plan, keyed by bitmask.
    pub fn distribution(&self, plan: &StagePlan) -> Result<BTreeMap<u64, f64>> {
        let n = self.net.n();
        plan.validate(n)?;
        if plan.tail.is_some() {
            return Err(Error::InvalidPlan("exact enumeration takes no antisense tail".into()));
        }
        let stages: Vec<u64> =
            if plan.stages.is_empty() { vec![0] } else { plan.stages.iter().map(NodeSet::to_mask).collect() };
        self.distribution_of_masks(&stages)
    }

    fn distribution_of_masks(&self, stages: &[u64]) -> Result<BTreeMap<u64, f64>> {
        let n = self.net.n();
        let mut frontier: BTreeMap<StateKey, f64> = BTreeMap::new();
        frontier.insert(state_key(0, 0, stages[0]), 1.0);
        let mut terminal = BTreeMap::new();
        let mut uncertain: Vec<(usize, f64)> = Vec::with_capacity(n);

        while let Some(((stage, _, _, prev, cur), mass)) = frontier.pop_first() {
            if prev == cur {
                if stage + 1 < stages.len() {
                    let next = cur | stages[stage + 1];
                    *frontier.entry(state_key(stage + 1, cur, next)).or_insert(0.0) += mass;
                } else {
                    *terminal.entry(cur).or_insert(0.0) += mass;
                }
                continue;
            }
            let mut certain = cur;
            uncertain.clear();
            for v in (0..n).filter(|&v| cur >> v & 1 == 0) {
                let before = self.values[v][prev as usize];
                let now = self.values[v][cur as usize];
                if now <= before {
                    continue;
                }
                if before >= 1.0 {
                    return Err(Error::InternalInvariant(format!(
                        "node {} inactive after its activation value reached 1",
                        self.net.label(v)
                    )));
                }
                let q = (now - before) / (1.0 - before);
                if q >= 1.0 {
                    certain |= 1 << v;
                } else {
                    uncertain.push((v, q));
                }
            }
            for pick in 0..1u64 << uncertain.len() {
                let mut p = mass;
                let mut next = certain;
                for (i, &(v, q)) in uncertain.iter().enumerate() {
                    if pick >> i & 1 == 1 {
                        p *= q;
                        next |= 1 << v;
                    } else {
                        p *= 1.0 - q;
                    }
                }
                *frontier.entry(state_key(stage, cur, next)).or_insert(0.0) += p;
            }
        }
        Ok(terminal)
    }

    /// Exact distribution and `σ_w` for a staged plan.
    pub fn evaluate(&self, plan: &StagePlan, w: &WeightFunction) -> Result<ExactResult> {
        let n = self.net.n();
        let dist = self.distribution(plan)?;
        let sigma = dist.iter().map(|(&m, &p)| p * w.eval_mask(m)).sum();
        let distribution = dist.into_iter().map(|(m, p)| (NodeSet::from_mask(n, m), p)).collect();
        Ok(ExactResult { distribution, sigma })
    }

    /// `σ_w` of a single-stage seed set given as a bitmask.
    pub fn sigma_mask(&self, seeds: u64, w: &WeightFunction) -> Result<f64> {
        let dist = self.distribution_of_masks(&[seeds])?;
        Ok(dist.iter().map(|(&m, &p)| p * w.eval_mask(m)).sum())
    }

    /// `σ_w` for every seed set, indexed by bitmask.
    pub fn sigma_table(&self, w: &WeightFunction) -> Result<Vec<f64>> {
        (0..1u64 << self.net.n()).into_par_iter().map(|s| self.sigma_mask(s, w)).collect()
    }
}

/// Exact terminal distribution and influence of a staged plan.
pub fn exact_sigma(net: &SocialNetwork, plan: &StagePlan, w: &WeightFunction) -> Result<ExactResult> {
    ExactOracle::new(net)?.evaluate(plan, w)
}

fn check_confidence(confidence: f64) -> Result<()> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::InvalidArgument(format!("confidence {confidence} outside (0, 1)")));
    }
    Ok(())
}

/// Hoeffding radius `range * sqrt(ln(2 / (1 - confidence)) / (2 R))`.
pub fn hoeffding_radius(range: f64, replicates: u64, confidence: f64) -> f64 {
    range * ((2.0 / (1.0 - confidence)).ln() / (2.0 * replicates as f64)).sqrt()
}

/// Smallest replicate count whose Hoeffding radius is at most `epsilon`.
pub fn required_replicates(range: f64, epsilon: f64, confidence: f64) -> Result<u64> {
    check_confidence(confidence)?;
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon {epsilon} must be positive")));
    }
    if range <= 0.0 || epsilon >= range {
        return Ok(1);
    }
    let exact = range * range * (2.0 / (1.0 - confidence)).ln() / (2.0 * epsilon * epsilon);
    let mut r = exact.ceil().max(1.0) as u64;
    // guard against rounding on either side of the boundary
    while r > 1 && hoeffding_radius(range, r - 1, confidence) <= epsilon {
        r -= 1;
    }
    while hoeffding_radius(range, r, confidence) > epsilon {
        r += 1;
    }
    Ok(r)
}

/// One terminal set under freshly sampled thresholds from `rng`.
pub fn sample_terminal<R: rand::Rng + ?Sized>(net: &SocialNetwork, plan: &StagePlan, rng: &mut R) -> Result<NodeSet> {
    let thresholds = sample_thresholds(net.n(), rng);
    let traj = if plan.tail.is_some() { run_antisense(net, plan, &thresholds)? } else { run(net, plan, &thresholds)? };
    Ok(traj.terminal().clone())
}

/// Monte Carlo estimate of `σ_w` over `replicates` eager runs.
///
/// Replicate `i` draws its thresholds from `replicate_rng(seed, i)`, and the
/// mean is accumulated in replicate order, so the result does not depend on the
/// number of worker threads.
pub fn estimate_mc(
    net: &SocialNetwork,
    plan: &StagePlan,
    w: &WeightFunction,
    replicates: u64,
    confidence: f64,
    seed: u64,
) -> Result<InfluenceEstimate> {
    if replicates == 0 {
        return Err(Error::InvalidArgument("at least one replicate is required".into()));
    }
    check_confidence(confidence)?;
    plan.validate(net.n())?;
    let values = (0..replicates)
        .into_par_iter()
        .map(|i| sample_terminal(net, plan, &mut replicate_rng(seed, i)).map(|t| w.eval(&t)))
        .collect::<Result<Vec<f64>>>()?;
    let mean = values.iter().sum::<f64>() / replicates as f64;
    Ok(InfluenceEstimate {
        mean,
        half_width: hoeffding_radius(w.range(net.n()), replicates, confidence),
        replicates,
        confidence,
    })
}

/// Empirical terminal distribution over `replicates` runs (antisense when the
/// plan has a tail).
pub fn empirical_distribution(
    net: &SocialNetwork,
    plan: &StagePlan,
    replicates: u64,
    seed: u64,
) -> Result<BTreeMap<NodeSet, f64>> {
    plan.validate(net.n())?;
    let counts = (0..replicates)
        .into_par_iter()
        .map(|i| sample_terminal(net, plan, &mut replicate_rng(seed, i)))
        .try_fold(BTreeMap::<NodeSet, u64>::new, |mut acc, t| {
            *acc.entry(t?).or_insert(0) += 1;
            Ok::<_, Error>(acc)
        })
        .try_reduce(BTreeMap::new, |mut a, b| {
            for (k, c) in b {
                *a.entry(k).or_insert(0) += c;
            }
            Ok(a)
        })?;
    Ok(counts.into_iter().map(|(k, c)| (k, c as f64 / replicates as f64)).collect())
}

/// Total-variation distance `½ Σ |p - q|` between two distributions.
pub fn total_variation<K: Ord>(p: &BTreeMap<K, f64>, q: &BTreeMap<K, f64>) -> f64 {
    let mut sum = 0.0;
    for (k, a) in p {
        sum += (a - q.get(k).copied().unwrap_or(0.0)).abs();
    }
    for (k, b) in q {
        if !p.contains_key(k) {
            sum += b.abs();
        }
    }
    sum / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::load_network;

    fn chain() -> SocialNetwork {
        load_network(
            r#"{"nodes": ["a", "b", "c"], "activations": {
                "b": {"type": "linear", "weights": {"a": 0.5}},
                "c": {"type": "linear", "weights": {"b": 0.5}}}}"#,
        )
        .unwrap()
    }

    #[test]
    fn chain_golden_distribution() {
        let net = chain();
        let res = exact_sigma(&net, &StagePlan::single(net.parse_set("a").unwrap()), net.weight()).unwrap();
        assert!((res.sigma - 1.75).abs() < 1e-12);
        assert!((res.probability_of(&net.parse_set("a").unwrap()) - 0.5).abs() < 1e-12);
        assert!((res.probability_of(&net.parse_set("a,b").unwrap()) - 0.25).abs() < 1e-12);
        assert!((res.probability_of(&net.parse_set("a,b,c").unwrap()) - 0.25).abs() < 1e-12);
        assert_eq!(res.distribution.len(), 3);
    }

    #[test]
    fn trivial_seed_sets() {
        let net = chain();
        let w = net.weight();
        let none = exact_sigma(&net, &StagePlan::single(net.empty_set()), w).unwrap();
        assert_eq!(none.distribution, vec![(net.empty_set(), 1.0)]);
        assert_eq!(none.sigma, 0.0);
        let all = exact_sigma(&net, &StagePlan::single(net.full_set()), w).unwrap();
        assert_eq!(all.sigma, 3.0);
    }

    #[test]
    fn cap_enforced() {
        let net = SocialNetwork::unlabeled(vec![crate::network::Activation::zero(); 15], WeightFunction::Cardinality)
            .unwrap();
        assert!(matches!(ExactOracle::new(&net), Err(Error::DomainTooLarge { .. })));
        assert!(ExactOracle::with_cap(&net, 15).is_ok());
    }

    #[test]
    fn replicate_counts() {
        assert_eq!(required_replicates(1.0, 0.01, 0.95).unwrap(), 18445);
        assert_eq!(required_replicates(0.0, 0.01, 0.95).unwrap(), 1);
        assert_eq!(required_replicates(1.0, 1.0, 0.95).unwrap(), 1);
        assert_eq!(required_replicates(1.0, 2.0, 0.95).unwrap(), 1);
        assert!(required_replicates(1.0, 0.0, 0.95).is_err());
        assert!(required_replicates(1.0, 0.1, 1.0).is_err());
    }

    #[test]
    fn mc_constant_outcomes() {
        let net = chain();
        let est = estimate_mc(&net, &StagePlan::single(net.full_set()), net.weight(), 10, 0.9, 1).unwrap();
        assert_eq!(est.mean, 3.0);
        assert!((est.half_width - hoeffding_radius(3.0, 10, 0.9)).abs() < 1e-15);

        let det =
            load_network(r#"{"nodes": ["a", "b"], "activations": {"b": {"type": "linear", "weights": {"a": 1.0}}}}"#)
                .unwrap();
        let est = estimate_mc(&det, &StagePlan::single(det.parse_set("a").unwrap()), det.weight(), 1, 0.95, 5).unwrap();
        assert_eq!(est.mean, 2.0);
        assert_eq!(est.replicates, 1);
        assert!((est.half_width - 2.0 * (40f64.ln() / 2.0).sqrt()).abs() < 1e-12);
        assert!(estimate_mc(&det, &StagePlan::single(det.empty_set()), det.weight(), 0, 0.95, 5).is_err());
    }

    #[test]
    fn tv_distance() {
        let p = BTreeMap::from([(1, 0.5), (2, 0.5)]);
        let q = BTreeMap::from([(2, 0.5), (3, 0.5)]);
        assert_eq!(total_variation(&p, &q), 0.5);
        assert_eq!(total_variation(&p, &p), 0.0);
    }
}

//! The progressive threshold process.
//!
//! Four ways of running it share the same staged structure:
//!
//! * [`run`]: thresholds fixed up front; an inactive node `v` joins at step `t`
//!   when `f_v(S_{t-1}) >= θ_v`.
//! * [`run_lazy`]: thresholds revealed on a need-to-know basis; an inactive node
//!   joins with probability `(f_v(S_{t-1}) - ℓ_v) / (1 - ℓ_v)` where `ℓ_v` is the
//!   largest value of `f_v` the node has survived so far (0 initially).
//! * staged plans: seeds are injected in stages, each stage running to its fixed
//!   point from the previous terminal set plus the stage's seeds.
//! * [`run_antisense`]: after the stages, a tail set `T` is injected and the last
//!   phase activates `v` when `f_v(T_{t-1}) - f_v(X) >= 1 - θ_v`, with `X` the
//!   terminal set of the last regular stage.
//!
//! Stages run to their fixed point instead of a fixed `n` steps; the fixed point
//! is always reached within `n - 1` steps of a non-empty start.

use rand::Rng;

use crate::error::{Error, Result};
use crate::network::{Activation, SocialNetwork, ThresholdCdf};
use crate::set::NodeSet;

/// Per-node thresholds `θ_v ∈ (0, 1]`, optionally with the reflected copies used
/// by the antisense phase.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdAssignment {
    pub theta: Vec<f64>,
    pub reflected: Option<Vec<f64>>,
}

impl ThresholdAssignment {
    pub fn new(theta: Vec<f64>) -> Result<Self> {
        if let Some(t) = theta.iter().find(|t| !(**t > 0.0 && **t <= 1.0)) {
            return Err(Error::InvalidPlan(format!("threshold {t} outside (0, 1]")));
        }
        Ok(ThresholdAssignment { theta, reflected: None })
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    /// Attaches `θ'_v = f_v(X) + 1 - θ_v` for `v ∉ X` (and `θ'_v = θ_v` on `X`),
    /// where `X` is the set active when the antisense phase begins.
    pub fn with_reflection(mut self, net: &SocialNetwork, boundary: &NodeSet) -> Self {
        let reflected = (0..self.theta.len())
            .map(|v| {
                if boundary.contains(v) {
                    self.theta[v]
                } else {
                    net.eval_activation(v, boundary) + 1.0 - self.theta[v]
                }
            })
            .collect();
        self.reflected = Some(reflected);
        self
    }
}

/// Independent thresholds uniform on `(0, 1]`.
pub fn sample_thresholds<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ThresholdAssignment {
    // gen::<f64>() is uniform on [0, 1)
    let theta = (0..n).map(|_| 1.0 - rng.gen::<f64>()).collect();
    ThresholdAssignment { theta, reflected: None }
}

/// Seeds injected in stages, with an optional antisense tail.
#[derive(Debug, Clone, PartialEq)]
pub struct StagePlan {
    pub stages: Vec<NodeSet>,
    pub tail: Option<NodeSet>,
}

impl StagePlan {
    pub fn single(seeds: NodeSet) -> Self {
        StagePlan { stages: vec![seeds], tail: None }
    }

    pub fn staged(stages: Vec<NodeSet>) -> Self {
        StagePlan { stages, tail: None }
    }

    pub fn with_tail(mut self, tail: NodeSet) -> Self {
        self.tail = Some(tail);
        self
    }

    /// Union of all stages (and the tail, if any).
    pub fn seeds(&self, n: usize) -> NodeSet {
        let mut all = NodeSet::empty(n);
        for s in self.stages.iter().chain(self.tail.as_ref()) {
            all.union_with(s);
        }
        all
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let mut seen = NodeSet::empty(n);
        for (k, stage) in self.stages.iter().enumerate() {
            if stage.universe() != n {
                return Err(Error::InvalidPlan(format!("stage {k} lives in a universe of {}", stage.universe())));
            }
            if !seen.is_disjoint(stage) {
                return Err(Error::InvalidPlan(format!("stage {k} overlaps an earlier stage")));
            }
            seen.union_with(stage);
        }
        if let Some(tail) = &self.tail {
            if tail.universe() != n {
                return Err(Error::InvalidPlan("tail lives in the wrong universe".into()));
            }
            if !seen.is_disjoint(tail) {
                return Err(Error::InvalidPlan("tail intersects the stages".into()));
            }
        }
        Ok(())
    }
}

/// Active sets over time. `sets[stage_boundaries[k]]` is the start of stage `k`
/// (previous terminal set plus the stage's seeds); within a stage the sets grow
/// strictly until the fixed point.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub sets: Vec<NodeSet>,
    pub stage_boundaries: Vec<usize>,
}

impl Trajectory {
    fn new() -> Self {
        Trajectory { sets: Vec::new(), stage_boundaries: Vec::new() }
    }

    pub fn terminal(&self) -> &NodeSet {
        self.sets.last().expect("trajectory has at least one set")
    }

    pub fn stage_count(&self) -> usize {
        self.stage_boundaries.len()
    }

    pub fn stage(&self, k: usize) -> &[NodeSet] {
        let start = self.stage_boundaries[k];
        let end = self.stage_boundaries.get(k + 1).copied().unwrap_or(self.sets.len());
        &self.sets[start..end]
    }

    /// Longest stage, counted in recorded sets.
    pub fn longest_stage(&self) -> usize {
        (0..self.stage_count()).map(|k| self.stage(k).len()).max().unwrap_or(0)
    }

    /// Stage `k`'s terminal set.
    pub fn stage_terminal(&self, k: usize) -> &NodeSet {
        self.stage(k).last().unwrap()
    }

    /// Lays every stage out on a block of `block` time steps, repeating its fixed point.
    pub fn padded(&self, block: usize) -> Vec<NodeSet> {
        let mut out = Vec::with_capacity(block * self.stage_count());
        for k in 0..self.stage_count() {
            let stage = self.stage(k);
            assert!(stage.len() <= block, "stage {k} needs {} steps, block is {block}", stage.len());
            out.extend_from_slice(stage);
            let last = stage.last().unwrap().clone();
            out.extend(std::iter::repeat_n(last, block - stage.len()));
        }
        out
    }

    fn begin_stage(&mut self, start: NodeSet) {
        self.stage_boundaries.push(self.sets.len());
        self.sets.push(start);
    }
}

fn check_thresholds(net: &SocialNetwork, thresholds: &ThresholdAssignment) -> Result<()> {
    if thresholds.len() != net.n() {
        return Err(Error::InvalidPlan(format!("{} thresholds for {} nodes", thresholds.len(), net.n())));
    }
    Ok(())
}

fn stage_start(net: &SocialNetwork, traj: &Trajectory, seeds: &NodeSet) -> NodeSet {
    match traj.sets.last() {
        Some(prev) => prev.union(seeds),
        None => net.empty_set().union(seeds),
    }
}

/// Runs regular stages with fixed thresholds, appending to `traj`.
fn run_regular_stages(net: &SocialNetwork, stages: &[NodeSet], theta: &[f64], traj: &mut Trajectory) {
    for seeds in stages {
        let mut cur = stage_start(net, traj, seeds);
        traj.begin_stage(cur.clone());
        loop {
            let mut next = cur.clone();
            for v in (0..net.n()).filter(|&v| !cur.contains(v)) {
                if net.eval_activation(v, &cur) >= theta[v] {
                    next.insert(v);
                }
            }
            if next == cur {
                break;
            }
            traj.sets.push(next.clone());
            cur = next;
        }
    }
}

/// Staged process with fixed thresholds.
pub fn run(net: &SocialNetwork, plan: &StagePlan, thresholds: &ThresholdAssignment) -> Result<Trajectory> {
    plan.validate(net.n())?;
    if plan.tail.is_some() {
        return Err(Error::InvalidPlan("use run_antisense for plans with a tail".into()));
    }
    check_thresholds(net, thresholds)?;
    let mut traj = Trajectory::new();
    run_regular_stages(net, &plan.stages, &thresholds.theta, &mut traj);
    if traj.sets.is_empty() {
        traj.begin_stage(net.empty_set());
    }
    Ok(traj)
}

/// Staged process followed by the antisense phase seeded with the plan's tail.
pub fn run_antisense(net: &SocialNetwork, plan: &StagePlan, thresholds: &ThresholdAssignment) -> Result<Trajectory> {
    plan.validate(net.n())?;
    check_thresholds(net, thresholds)?;
    let theta = &thresholds.theta;
    let mut traj = Trajectory::new();
    run_regular_stages(net, &plan.stages, theta, &mut traj);

    let boundary = traj.sets.last().cloned().unwrap_or_else(|| net.empty_set());
    let base: Vec<f64> = (0..net.n()).map(|v| net.eval_activation(v, &boundary)).collect();
    let tail = plan.tail.clone().unwrap_or_else(|| net.empty_set());
    let mut cur = boundary.union(&tail);
    traj.begin_stage(cur.clone());
    loop {
        let mut next = cur.clone();
        for v in (0..net.n()).filter(|&v| !cur.contains(v)) {
            if net.eval_activation(v, &cur) - base[v] >= 1.0 - theta[v] {
                next.insert(v);
            }
        }
        if next == cur {
            break;
        }
        traj.sets.push(next.clone());
        cur = next;
    }
    Ok(traj)
}

/// Staged process with need-to-know threshold revelation.
///
/// Random draws happen in node-id order, one per node whose activation value
/// rose since it last survived.
pub fn run_lazy<R: Rng + ?Sized>(net: &SocialNetwork, plan: &StagePlan, rng: &mut R) -> Result<Trajectory> {
    plan.validate(net.n())?;
    if plan.tail.is_some() {
        return Err(Error::InvalidPlan("lazy runs take no antisense tail".into()));
    }
    let n = net.n();
    // largest activation value each node has survived
    let mut survived = vec![0.0f64; n];
    let mut traj = Trajectory::new();
    for seeds in &plan.stages {
        let mut cur = stage_start(net, &traj, seeds);
        traj.begin_stage(cur.clone());
        loop {
            let mut next = cur.clone();
            for v in (0..n).filter(|&v| !cur.contains(v)) {
                let level = survived[v];
                let value = net.eval_activation(v, &cur);
                if value <= level {
                    continue;
                }
                let room = 1.0 - level;
                if room <= 0.0 {
                    return Err(Error::InternalInvariant(format!(
                        "node {} inactive after surviving activation value {level}",
                        net.label(v)
                    )));
                }
                if rng.gen::<f64>() < (value - level) / room {
                    next.insert(v);
                } else {
                    survived[v] = value;
                }
            }
            if next == cur {
                break;
            }
            traj.sets.push(next.clone());
            cur = next;
        }
    }
    if traj.sets.is_empty() {
        traj.begin_stage(net.empty_set());
    }
    Ok(traj)
}

/// Replaces every activation `f_v` by `F_v ∘ f_v`.
///
/// Running the result with uniform thresholds matches running `net` with
/// `θ_v = F_v^{-1}(U_v)`.
pub fn compose_cdfs(net: &SocialNetwork, cdfs: &[ThresholdCdf]) -> Result<SocialNetwork> {
    if cdfs.len() != net.n() {
        return Err(Error::InvalidCdf(format!("{} cdfs for {} nodes", cdfs.len(), net.n())));
    }
    let activations = net
        .activations()
        .iter()
        .zip(cdfs)
        .map(|(f, cdf)| match f {
            Activation::Composed { .. } => Err(Error::InvalidCdf("activation is already composed with a cdf".into())),
            f => Ok(Activation::Composed { inner: Box::new(f.clone()), cdf: cdf.clone() }),
        })
        .collect::<Result<Vec<_>>>()?;
    net.with_activations(activations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::load_network;
    use crate::rng::replicate_rng;

    fn chain() -> SocialNetwork {
        load_network(
            r#"{"nodes": ["a", "b", "c"], "activations": {
                "b": {"type": "linear", "weights": {"a": 0.5}},
                "c": {"type": "linear", "weights": {"b": 0.5}}}}"#,
        )
        .unwrap()
    }

    fn thetas(t: &[f64]) -> ThresholdAssignment {
        ThresholdAssignment::new(t.to_vec()).unwrap()
    }

    #[test]
    fn sampling_contract() {
        let mut rng = replicate_rng(1, 0);
        assert!(sample_thresholds(0, &mut rng).is_empty());
        let a = sample_thresholds(3, &mut replicate_rng(42, 0));
        let b = sample_thresholds(3, &mut replicate_rng(42, 0));
        assert_eq!(a, b);
        assert!(a.theta.iter().all(|t| *t > 0.0 && *t <= 1.0));
    }

    #[test]
    fn sample_mean_is_one_half() {
        let mut rng = replicate_rng(2024, 0);
        let t = sample_thresholds(1_000_000, &mut rng);
        let mean = t.theta.iter().sum::<f64>() / 1e6;
        assert!((mean - 0.5).abs() < 0.002, "mean {mean}");
    }

    #[test]
    fn chain_run_blocks_at_c() {
        let net = chain();
        let plan = StagePlan::single(net.parse_set("a").unwrap());
        let traj = run(&net, &plan, &thetas(&[0.5, 0.4, 0.9])).unwrap();
        assert_eq!(traj.terminal(), &net.parse_set("a,b").unwrap());
        assert_eq!(traj.sets.len(), 2);
    }

    #[test]
    fn empty_and_full_seeds() {
        let net = chain();
        let t = thetas(&[0.1, 0.1, 0.1]);
        let traj = run(&net, &StagePlan::single(net.empty_set()), &t).unwrap();
        assert!(traj.terminal().is_empty());
        let traj = run(&net, &StagePlan::single(net.full_set()), &t).unwrap();
        assert_eq!(traj.sets, vec![net.full_set()]);
    }

    #[test]
    fn overlapping_stages_rejected() {
        let net = chain();
        let a = net.parse_set("a").unwrap();
        let plan = StagePlan::staged(vec![a.clone(), a]);
        assert!(matches!(run(&net, &plan, &thetas(&[0.5; 3])), Err(Error::InvalidPlan(_))));
        let plan = StagePlan::single(net.parse_set("a").unwrap()).with_tail(net.parse_set("a,c").unwrap());
        assert!(run_antisense(&net, &plan, &thetas(&[0.5; 3])).is_err());
    }

    #[test]
    fn antisense_chain_trace() {
        let net = chain();
        let plan = StagePlan::single(net.parse_set("a").unwrap()).with_tail(net.parse_set("c").unwrap());
        let traj = run_antisense(&net, &plan, &thetas(&[0.5, 0.6, 0.5])).unwrap();
        assert_eq!(traj.stage_count(), 2);
        assert_eq!(traj.terminal(), &net.parse_set("a,c").unwrap());
    }

    #[test]
    fn antisense_empty_tail_adds_nothing() {
        let net = chain();
        let plan = StagePlan::single(net.parse_set("a").unwrap()).with_tail(net.empty_set());
        let t = thetas(&[0.3, 0.7, 0.2]);
        let regular = run(&net, &StagePlan::single(net.parse_set("a").unwrap()), &t).unwrap();
        let anti = run_antisense(&net, &plan, &t).unwrap();
        assert_eq!(anti.terminal(), regular.terminal());
    }

    #[test]
    fn antisense_full_increment_activates() {
        let net =
            load_network(r#"{"nodes": ["u", "v"], "activations": {"v": {"type": "linear", "weights": {"u": 1.0}}}}"#)
                .unwrap();
        let plan = StagePlan::single(net.empty_set()).with_tail(net.parse_set("u").unwrap());
        for theta in [0.01, 0.5, 0.99, 1.0] {
            let traj = run_antisense(&net, &plan, &thetas(&[0.5, theta])).unwrap();
            assert_eq!(traj.terminal(), &net.full_set());
        }
    }

    #[test]
    fn reflected_thresholds_reproduce_antisense_phase() {
        let net = chain();
        let a = net.parse_set("a").unwrap();
        let plan = StagePlan::single(a.clone()).with_tail(net.parse_set("b").unwrap());
        let t = thetas(&[0.3, 0.8, 0.35]);
        let anti = run_antisense(&net, &plan, &t).unwrap();
        let boundary = anti.stage_terminal(0).clone();
        let reflected = t.clone().with_reflection(&net, &boundary);
        let theta_prime = ThresholdAssignment::new(reflected.reflected.unwrap()).unwrap();
        let regular = run(&net, &StagePlan::staged(vec![boundary, net.parse_set("b").unwrap()]), &theta_prime).unwrap();
        assert_eq!(anti.terminal(), regular.terminal());
    }

    #[test]
    fn lazy_first_step_probability() {
        let net = chain();
        let plan = StagePlan::single(net.parse_set("a").unwrap());
        let b = 1;
        let runs = 200_000;
        let hits = (0..runs)
            .filter(|&i| {
                let traj = run_lazy(&net, &plan, &mut replicate_rng(9, i)).unwrap();
                traj.sets.get(1).is_some_and(|s| s.contains(b))
            })
            .count();
        let p = hits as f64 / runs as f64;
        // 5 standard errors of a Bernoulli(0.5) mean
        assert!((p - 0.5).abs() < 5.0 * (0.25f64 / runs as f64).sqrt(), "p = {p}");
    }

    #[test]
    fn lazy_certain_activation() {
        let net =
            load_network(r#"{"nodes": ["u", "v"], "activations": {"v": {"type": "linear", "weights": {"u": 1.0}}}}"#)
                .unwrap();
        let plan = StagePlan::single(net.parse_set("u").unwrap());
        for i in 0..100 {
            let traj = run_lazy(&net, &plan, &mut replicate_rng(3, i)).unwrap();
            assert_eq!(traj.sets.len(), 2);
            assert_eq!(traj.terminal(), &net.full_set());
        }
    }

    #[test]
    fn padding_layout() {
        let net = chain();
        let plan = StagePlan::staged(vec![net.parse_set("a").unwrap(), net.empty_set()]);
        let traj = run(&net, &plan, &thetas(&[0.1, 0.1, 0.1])).unwrap();
        let padded = traj.padded(3);
        assert_eq!(padded.len(), 6);
        assert_eq!(padded[2], net.full_set());
        assert!(padded[3..].iter().all(|s| *s == net.full_set()));
    }

    #[test]
    fn compose_identity_and_square() {
        let net = chain();
        let ident = compose_cdfs(&net, &vec![ThresholdCdf::identity(); 3]).unwrap();
        let sq = compose_cdfs(&net, &vec![ThresholdCdf::sampled(|x| x * x, 2).unwrap(); 3]).unwrap();
        for mask in 0..8 {
            let s = NodeSet::from_mask(3, mask);
            for v in 0..3 {
                assert_eq!(ident.eval_activation(v, &s), net.eval_activation(v, &s));
            }
        }
        assert_eq!(sq.eval_activation(1, &net.parse_set("a").unwrap()), 0.25);
    }

    #[test]
    fn compose_step_cdf_near_one() {
        let net = chain();
        let step = ThresholdCdf::new(vec![(0.0, 0.0), (0.99, 0.0), (1.0, 1.0)]).unwrap();
        let composed = compose_cdfs(&net, &vec![step; 3]).unwrap();
        for mask in 0..8 {
            let s = NodeSet::from_mask(3, mask);
            for v in 0..3 {
                assert!(composed.eval_activation(v, &s) < 1e-12);
            }
        }
    }
}

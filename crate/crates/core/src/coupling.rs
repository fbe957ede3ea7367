//! Four coupled threshold processes driven by one threshold draw.
//!
//! For seed sets `A` and `B` the processes are
//!
//! ```text
//! A ~ Q (A∩B, A∖B, ∅)
//! B ~ Q-(A∩B, ∅;   B∖A)
//! C ~ Q (A∩B, ∅,   ∅)
//! D ~ Q-(A∩B, A∖B; B∖A)
//! ```
//!
//! where `Q` runs its stages in turn and `Q-` finishes with an antisense phase
//! seeded by the set after the semicolon. Each stage is padded to a common block
//! length (normally `n`), so the trace has three phases starting at `0`, `block`
//! and `2·block`. With shared thresholds, on a monotone submodular network
//!
//! ```text
//! C_t ⊆ A_t ∩ B_t   and   D_t ⊆ A_t ∪ B_t   for every t,
//! ```
//!
//! and during the last phase, with `b = 2·block - 1`,
//!
//! ```text
//! Ω1: D_t ∖ D_b ⊆ B_t ∖ B_b
//! Ω2: f_v(B_t) - f_v(B_b) >= f_v(D_t) - f_v(D_b)   for v ∉ D_{2·block}.
//! ```

use std::collections::HashSet;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diffusion::{run, run_antisense, sample_thresholds, StagePlan, ThresholdAssignment, Trajectory};
use crate::error::{Error, Result};
use crate::influence::ExactOracle;
use crate::network::{Activation, SocialNetwork, WeightFunction, TOLERANCE};
use crate::set::{NodeId, NodeSet};

/// Node cap for θ-grid verification.
pub const MAX_GRID_NODES: usize = 4;

/// Label of the node added by [`build_counterexample`].
pub const COUNTEREXAMPLE_NODE: &str = "v*";

/// Synchronized trajectories of the four processes.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingTrace {
    pub a_seeds: NodeSet,
    pub b_seeds: NodeSet,
    pub theta: Vec<f64>,
    /// Length of each phase.
    pub block: usize,
    pub a: Vec<NodeSet>,
    pub b: Vec<NodeSet>,
    pub c: Vec<NodeSet>,
    pub d: Vec<NodeSet>,
}

impl CouplingTrace {
    pub fn steps(&self) -> usize {
        self.a.len()
    }

    /// First step of phases 2 and 3.
    pub fn phase_starts(&self) -> (usize, usize) {
        (self.block, 2 * self.block)
    }

    fn sets_at(&self, t: usize) -> [NodeSet; 4] {
        [self.a[t].clone(), self.b[t].clone(), self.c[t].clone(), self.d[t].clone()]
    }
}

fn plans(a: &NodeSet, b: &NodeSet) -> [StagePlan; 4] {
    let n = a.universe();
    let both = a.intersection(b);
    let only_a = a.difference(b);
    let only_b = b.difference(a);
    let none = NodeSet::empty(n);
    [
        StagePlan::staged(vec![both.clone(), only_a.clone(), none.clone()]),
        StagePlan::staged(vec![both.clone(), none.clone()]).with_tail(only_b.clone()),
        StagePlan::staged(vec![both.clone(), none.clone(), none]),
        StagePlan::staged(vec![both, only_a]).with_tail(only_b),
    ]
}

/// Runs the four processes under the given thresholds.
pub fn run_coupled_with(
    net: &SocialNetwork,
    a: &NodeSet,
    b: &NodeSet,
    thresholds: &ThresholdAssignment,
) -> Result<CouplingTrace> {
    let n = net.n();
    if a.universe() != n || b.universe() != n {
        return Err(Error::InvalidArgument(format!("seed sets must be over {n} nodes")));
    }
    let [pa, pb, pc, pd] = plans(a, b);
    let trajectories: [Trajectory; 4] = [
        run(net, &pa, thresholds)?,
        run_antisense(net, &pb, thresholds)?,
        run(net, &pc, thresholds)?,
        run_antisense(net, &pd, thresholds)?,
    ];
    // a threshold of exactly 1 can let the antisense phase run past n steps
    let block = trajectories.iter().map(Trajectory::longest_stage).max().unwrap_or(1).max(n).max(1);
    let [ta, tb, tc, td] = trajectories.map(|t| t.padded(block));
    Ok(CouplingTrace {
        a_seeds: a.clone(),
        b_seeds: b.clone(),
        theta: thresholds.theta.clone(),
        block,
        a: ta,
        b: tb,
        c: tc,
        d: td,
    })
}

/// Samples one threshold assignment and runs the four processes under it.
pub fn run_coupled<R: Rng + ?Sized>(
    net: &SocialNetwork,
    a: &NodeSet,
    b: &NodeSet,
    rng: &mut R,
) -> Result<CouplingTrace> {
    let thresholds = sample_thresholds(net.n(), rng);
    run_coupled_with(net, a, b, &thresholds)
}

/// Which check failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    /// A sequence shrank between consecutive steps.
    NotMonotone,
    /// `C_t ⊄ A_t ∩ B_t`.
    Intersection,
    /// `D_t ⊄ A_t ∪ B_t`.
    Union,
    /// `B_t ≠ C_t` or `D_t ≠ A_t` before the last phase.
    EarlyEquality,
    Omega1,
    Omega2,
}

/// First failed check, with the four sets at that step.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingViolation {
    pub t: usize,
    pub kind: ViolationKind,
    pub node: Option<NodeId>,
    pub sets: [NodeSet; 4],
}

/// Per-step outcome of [`verify_trace`].
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingReport {
    /// Both containments hold at step `t`.
    pub containment_ok: Vec<bool>,
    /// `B_t = C_t` and `D_t = A_t`, for steps before the last phase.
    pub early_equality_ok: Vec<bool>,
    /// Indexed by `t - 2·block`.
    pub omega1_ok: Vec<bool>,
    pub omega2_ok: Vec<bool>,
    pub monotone_ok: bool,
    pub first_violation: Option<CouplingViolation>,
}

impl CouplingReport {
    pub fn holds(&self) -> bool {
        self.first_violation.is_none()
    }

    pub fn containment_holds(&self) -> bool {
        self.containment_ok.iter().all(|&ok| ok)
    }

    pub fn omega_holds(&self) -> bool {
        self.omega1_ok.iter().chain(&self.omega2_ok).all(|&ok| ok)
    }
}

fn check_shape(trace: &CouplingTrace, net: &SocialNetwork) -> Result<()> {
    let n = net.n();
    let mismatch = |msg: String| Err(Error::TraceMismatch(msg));
    if trace.theta.len() != n {
        return mismatch(format!("{} thresholds for {n} nodes", trace.theta.len()));
    }
    if trace.block == 0 {
        return mismatch("block length is zero".into());
    }
    let steps = 3 * trace.block;
    for (name, seq) in [("A", &trace.a), ("B", &trace.b), ("C", &trace.c), ("D", &trace.d)] {
        if seq.len() != steps {
            return mismatch(format!("{name} has {} steps, expected {steps}", seq.len()));
        }
        if seq.iter().any(|s| s.universe() != n) {
            return mismatch(format!("{name} has sets over the wrong node count"));
        }
    }
    if trace.a_seeds.universe() != n || trace.b_seeds.universe() != n {
        return mismatch("seed sets over the wrong node count".into());
    }
    Ok(())
}

/// Checks every coupling invariant on `trace`.
pub fn verify_trace(trace: &CouplingTrace, net: &SocialNetwork) -> Result<CouplingReport> {
    check_shape(trace, net)?;
    let steps = trace.steps();
    let (_, last) = trace.phase_starts();
    let mut first: Option<CouplingViolation> = None;
    let mut flag = |t: usize, kind, node| {
        if first.is_none() {
            first = Some(CouplingViolation { t, kind, node, sets: trace.sets_at(t) });
        }
    };

    let b_base = &trace.b[last - 1];
    let d_base = &trace.d[last - 1];
    let watched: Vec<NodeId> = (0..net.n()).filter(|&v| !trace.d[last].contains(v)).collect();

    let mut monotone_ok = true;
    let mut containment_ok = Vec::with_capacity(steps);
    let mut early_equality_ok = Vec::with_capacity(last);
    let mut omega1_ok = Vec::with_capacity(steps - last);
    let mut omega2_ok = Vec::with_capacity(steps - last);
    for t in 0..steps {
        let (a, b, c, d) = (&trace.a[t], &trace.b[t], &trace.c[t], &trace.d[t]);
        if t > 0 && ![&trace.a, &trace.b, &trace.c, &trace.d].iter().all(|seq| seq[t - 1].is_subset(&seq[t])) {
            monotone_ok = false;
            flag(t, ViolationKind::NotMonotone, None);
        }
        let inter = c.is_subset(&a.intersection(b));
        let union = d.is_subset(&a.union(b));
        if !inter {
            flag(t, ViolationKind::Intersection, c.difference(&a.intersection(b)).iter().next());
        }
        if !union {
            flag(t, ViolationKind::Union, d.difference(&a.union(b)).iter().next());
        }
        containment_ok.push(inter && union);

        if t < last {
            let eq = b == c && d == a;
            if !eq {
                flag(t, ViolationKind::EarlyEquality, None);
            }
            early_equality_ok.push(eq);
            continue;
        }
        let o1 = d.difference(d_base).is_subset(&b.difference(b_base));
        if !o1 {
            flag(t, ViolationKind::Omega1, d.difference(d_base).difference(b).iter().next());
        }
        let bad = watched.iter().copied().find(|&v| {
            let lhs = net.eval_activation(v, b) - net.eval_activation(v, b_base);
            let rhs = net.eval_activation(v, d) - net.eval_activation(v, d_base);
            lhs < rhs - TOLERANCE
        });
        if let Some(v) = bad {
            flag(t, ViolationKind::Omega2, Some(v));
        }
        omega1_ok.push(o1);
        omega2_ok.push(bad.is_none());
    }

    Ok(CouplingReport { containment_ok, early_equality_ok, omega1_ok, omega2_ok, monotone_ok, first_violation: first })
}

/// Re-runs the processes from the trace's own seeds and thresholds and reports
/// whether the recorded sets match.
pub fn replay_matches(trace: &CouplingTrace, net: &SocialNetwork) -> Result<bool> {
    check_shape(trace, net)?;
    let thresholds = ThresholdAssignment::new(trace.theta.clone())?;
    let fresh = run_coupled_with(net, &trace.a_seeds, &trace.b_seeds, &thresholds)?;
    Ok(&fresh == trace)
}

/// Outcome of checking every point of a threshold grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridReport {
    /// Grid points per node before merging equivalent ones.
    pub points_per_node: usize,
    /// Threshold vectors actually simulated.
    pub traces: u64,
    pub violations: u64,
    pub first_violation: Option<(Vec<f64>, CouplingViolation)>,
}

/// Midpoints `(i - 1/2)·step` of a uniform grid on `(0, 1]`.
pub fn grid_points(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::InvalidArgument(format!("grid step {step} outside (0, 1]")));
    }
    let count = (1.0 / step).round() as usize;
    let h = 1.0 / count as f64;
    Ok((1..=count).map(|i| (i as f64 - 0.5) * h).collect())
}

/// Grid points for node `v` that the threshold runs can tell apart.
///
/// Two thresholds are merged when they compare the same way against every
/// value `f_v(S)` and every antisense cut `f_v(Y) - f_v(X) >= 1 - θ`, using the
/// same arithmetic as the runners.
fn distinct_points(net: &SocialNetwork, v: NodeId, points: &[f64]) -> Vec<f64> {
    let n = net.n();
    let values: Vec<f64> = (0..1u64 << n).map(|m| net.eval_activation(v, &NodeSet::from_mask(n, m))).collect();
    let mut diffs: Vec<f64> = Vec::new();
    for x in 0..1usize << n {
        for y in 0..1usize << n {
            if x & y == x {
                diffs.push(values[y] - values[x]);
            }
        }
    }
    let mut seen = HashSet::new();
    points
        .iter()
        .copied()
        .filter(|&theta| {
            let signature: Vec<bool> =
                values.iter().map(|&f| f >= theta).chain(diffs.iter().map(|&d| d >= 1.0 - theta)).collect();
            seen.insert(signature)
        })
        .collect()
}

/// Verifies the coupling for every threshold vector on a uniform grid.
///
/// Limited to [`MAX_GRID_NODES`] nodes; grid points that no run can tell apart
/// are merged, so the result covers the full grid.
pub fn verify_grid(net: &SocialNetwork, a: &NodeSet, b: &NodeSet, step: f64) -> Result<GridReport> {
    let n = net.n();
    if n > MAX_GRID_NODES {
        return Err(Error::DomainTooLarge { size: n, limit: MAX_GRID_NODES });
    }
    let points = grid_points(step)?;
    let per_node: Vec<Vec<f64>> = (0..n).map(|v| distinct_points(net, v, &points)).collect();
    let total: u64 = per_node.iter().map(|p| p.len() as u64).product();

    let outcome = (0..total)
        .into_par_iter()
        .map(|mut index| {
            let mut theta = Vec::with_capacity(n);
            for pts in &per_node {
                theta.push(pts[(index % pts.len() as u64) as usize]);
                index /= pts.len() as u64;
            }
            let trace = run_coupled_with(net, a, b, &ThresholdAssignment::new(theta.clone())?)?;
            let report = verify_trace(&trace, net)?;
            Ok(report.first_violation.map(|w| (theta, w)))
        })
        .collect::<Result<Vec<_>>>()?;
    let violations = outcome.iter().filter(|o| o.is_some()).count() as u64;
    Ok(GridReport {
        points_per_node: points.len(),
        traces: total,
        violations,
        first_violation: outcome.into_iter().flatten().next(),
    })
}

/// A set function on labelled ground elements, tabulated by bitmask.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetFunctionDocument {
    pub nodes: Vec<String>,
    pub values: Vec<f64>,
}

/// Exact influences on the counterexample network.
#[derive(Debug, Clone)]
pub struct Counterexample {
    pub network: SocialNetwork,
    pub a: NodeSet,
    pub b: NodeSet,
    pub sigma_a: f64,
    pub sigma_b: f64,
    pub sigma_intersection: f64,
    pub sigma_union: f64,
}

impl Counterexample {
    /// `σ(A∩B) + σ(A∪B) - σ(A) - σ(B)`; positive for a genuine counterexample.
    pub fn gap(&self) -> f64 {
        self.sigma_intersection + self.sigma_union - self.sigma_a - self.sigma_b
    }
}

/// Builds a network on which influence is not submodular, from a set function
/// `f` that is not submodular at `(A, B)`.
///
/// The network adds one node `v*` with activation `f` over the original
/// elements, whose own activations are identically zero, so
/// `σ(S) = |S| + f(S)` for `S` inside the original elements.
pub fn build_counterexample(f: &SetFunctionDocument, a: &[String], b: &[String]) -> Result<Counterexample> {
    let m = f.nodes.len();
    if f.nodes.iter().any(|l| l == COUNTEREXAMPLE_NODE) {
        return Err(Error::DuplicateLabel(COUNTEREXAMPLE_NODE.into()));
    }
    let table = Activation::Table { neighbors: (0..m).collect(), values: f.values.clone() };
    table.validate(COUNTEREXAMPLE_NODE, false)?;
    let mut labels = f.nodes.clone();
    labels.push(COUNTEREXAMPLE_NODE.into());
    let mut activations = vec![Activation::zero(); m];
    activations.push(table);
    let network = SocialNetwork::new(labels, activations, WeightFunction::Cardinality)?;

    let to_set = |names: &[String]| -> Result<NodeSet> {
        let set = network.parse_set(&names.join(","))?;
        if set.contains(m) {
            return Err(Error::InvalidArgument(format!("{COUNTEREXAMPLE_NODE} cannot be a seed")));
        }
        Ok(set)
    };
    let (a, b) = (to_set(a)?, to_set(b)?);
    let value = |s: &NodeSet| f.values[s.to_mask() as usize];
    let (inter, union) = (a.intersection(&b), a.union(&b));
    if value(&a) + value(&b) >= value(&inter) + value(&union) - TOLERANCE {
        return Err(Error::NoViolation(format!(
            "f(A) + f(B) = {} >= f(A∩B) + f(A∪B) = {}",
            value(&a) + value(&b),
            value(&inter) + value(&union)
        )));
    }

    let oracle = ExactOracle::new(&network)?;
    let w = WeightFunction::Cardinality;
    let sigma = |s: &NodeSet| oracle.sigma_mask(s.to_mask(), &w);
    Ok(Counterexample {
        sigma_a: sigma(&a)?,
        sigma_b: sigma(&b)?,
        sigma_intersection: sigma(&inter)?,
        sigma_union: sigma(&union)?,
        network,
        a,
        b,
    })
}

/// One step of an exported trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceStep {
    pub t: usize,
    #[serde(rename = "A")]
    pub a: Vec<String>,
    #[serde(rename = "B")]
    pub b: Vec<String>,
    #[serde(rename = "C")]
    pub c: Vec<String>,
    #[serde(rename = "D")]
    pub d: Vec<String>,
}

/// JSON form of a [`CouplingTrace`]; sets are sorted label lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceDocument {
    pub nodes: Vec<String>,
    pub seeds_a: Vec<String>,
    pub seeds_b: Vec<String>,
    pub theta: Vec<f64>,
    pub block: usize,
    pub steps: Vec<TraceStep>,
}

fn sorted_labels(net: &SocialNetwork, set: &NodeSet) -> Vec<String> {
    let mut labels = net.set_labels(set);
    labels.sort();
    labels
}

pub fn export_trace(trace: &CouplingTrace, net: &SocialNetwork) -> TraceDocument {
    TraceDocument {
        nodes: net.labels().to_vec(),
        seeds_a: sorted_labels(net, &trace.a_seeds),
        seeds_b: sorted_labels(net, &trace.b_seeds),
        theta: trace.theta.clone(),
        block: trace.block,
        steps: (0..trace.steps())
            .map(|t| TraceStep {
                t,
                a: sorted_labels(net, &trace.a[t]),
                b: sorted_labels(net, &trace.b[t]),
                c: sorted_labels(net, &trace.c[t]),
                d: sorted_labels(net, &trace.d[t]),
            })
            .collect(),
    }
}

pub fn import_trace(doc: &TraceDocument, net: &SocialNetwork) -> Result<CouplingTrace> {
    if doc.nodes != net.labels() {
        return Err(Error::TraceMismatch("node list differs from the network".into()));
    }
    let set = |labels: &[String]| -> Result<NodeSet> {
        let mut s = net.empty_set();
        for l in labels {
            s.insert(net.id(l).ok_or_else(|| Error::TraceMismatch(format!("unknown node `{l}`")))?);
        }
        Ok(s)
    };
    if doc.steps.iter().enumerate().any(|(i, s)| s.t != i) {
        return Err(Error::TraceMismatch("steps are not numbered 0, 1, 2, ...".into()));
    }
    let seq = |pick: fn(&TraceStep) -> &Vec<String>| -> Result<Vec<NodeSet>> {
        doc.steps.iter().map(|s| set(pick(s))).collect()
    };
    let trace = CouplingTrace {
        a_seeds: set(&doc.seeds_a)?,
        b_seeds: set(&doc.seeds_b)?,
        theta: doc.theta.clone(),
        block: doc.block,
        a: seq(|s| &s.a)?,
        b: seq(|s| &s.b)?,
        c: seq(|s| &s.c)?,
        d: seq(|s| &s.d)?,
    };
    check_shape(&trace, net)?;
    Ok(trace)
}

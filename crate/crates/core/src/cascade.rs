//! Cascade models and their correspondence with threshold activations.
//!
//! In a cascade, each newly active node `w` gets one attempt at every inactive
//! `v` it influences, succeeding with probability `p_v(w, S)` where `S` holds
//! the neighbors that already tried `v` and failed. The maps
//!
//! ```text
//! p_v(w, S) = (f_v(S + w) - f_v(S)) / (1 - f_v(S))
//! f_v(S)    = 1 - Π_i (1 - p_v(w_i, {w_1, ..., w_{i-1}}))
//! ```
//!
//! translate between the two descriptions. States with `f_v(S) = 1` can never
//! be occupied by an inactive `v`; their probability is set to 1 and flagged.
//!
//! Attempts within a step run in ascending order of the attempting node, and
//! each attempter visits its targets in ascending order.

use std::collections::{BTreeMap, HashMap, VecDeque};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{
    cascade_product, collapse_probs, expand_probs, lookup, order_dependence, Activation, ProbEntry, SocialNetwork,
    WeightFunction, MAX_ORDER_CHECK_NEIGHBORS, TOLERANCE,
};
use crate::set::{NodeId, NodeSet};

/// Neighbor limit for tabulating a threshold activation as a cascade.
pub const MAX_CASCADE_NEIGHBORS: usize = 16;

/// Default node cap for exact cascade enumeration.
pub const DEFAULT_CASCADE_EXACT_CAP: usize = 12;

/// Success probabilities for one target node.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeNode {
    pub neighbors: Vec<NodeId>,
    /// `probs[i][mask]`: chance that `neighbors[i]` succeeds after the neighbors in
    /// `mask` failed. Entries with bit `i` set are unused.
    pub probs: Vec<Vec<f64>>,
    /// `unreachable[mask]`: the failed set `mask` cannot occur while the node is inactive.
    pub unreachable: Vec<bool>,
}

impl CascadeNode {
    fn degree(&self) -> usize {
        self.neighbors.len()
    }

    fn overall(&self, mask: u64) -> f64 {
        cascade_product(self.degree(), mask, |i, prefix| self.probs[i][prefix as usize])
    }
}

/// A tabulated cascade model.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeSpec {
    labels: Vec<String>,
    nodes: Vec<CascadeNode>,
}

impl CascadeSpec {
    pub fn new(labels: Vec<String>, nodes: Vec<CascadeNode>) -> Result<Self> {
        if labels.len() != nodes.len() {
            return Err(Error::Parse(format!("{} cascade entries for {} nodes", nodes.len(), labels.len())));
        }
        for (v, node) in nodes.iter().enumerate() {
            let size = 1usize << node.degree();
            if node.degree() > MAX_CASCADE_NEIGHBORS {
                return Err(Error::DomainTooLarge { size: node.degree(), limit: MAX_CASCADE_NEIGHBORS });
            }
            if node.neighbors.iter().any(|&w| w >= labels.len() || w == v) {
                return Err(Error::InvalidActivation {
                    node: labels[v].clone(),
                    reason: "neighbor out of range or self-loop".into(),
                });
            }
            if node.probs.len() != node.degree()
                || node.probs.iter().any(|r| r.len() != size)
                || node.unreachable.len() != size
            {
                return Err(Error::InvalidActivation {
                    node: labels[v].clone(),
                    reason: "probability table has the wrong shape".into(),
                });
            }
            for (i, row) in node.probs.iter().enumerate() {
                for (mask, p) in row.iter().enumerate() {
                    if mask >> i & 1 == 0 && !(0.0..=1.0).contains(p) {
                        return Err(Error::OutOfRange { node: labels[v].clone(), value: *p });
                    }
                }
            }
        }
        Ok(CascadeSpec { labels, nodes })
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn node(&self, v: NodeId) -> &CascadeNode {
        &self.nodes[v]
    }

    /// `p_v(neighbors[i], mask)`.
    pub fn prob(&self, v: NodeId, i: usize, mask: u64) -> f64 {
        self.nodes[v].probs[i][mask as usize]
    }

    /// `(target, neighbor index)` pairs each node attempts, ascending by target.
    fn targets(&self) -> Vec<Vec<(NodeId, usize)>> {
        let mut out = vec![Vec::new(); self.n()];
        for (v, node) in self.nodes.iter().enumerate() {
            for (i, &w) in node.neighbors.iter().enumerate() {
                out[w].push((v, i));
            }
        }
        out
    }

    fn index(&self) -> HashMap<String, NodeId> {
        self.labels.iter().enumerate().map(|(i, l)| (l.clone(), i)).collect()
    }

    /// Parses a label list into a node set.
    pub fn parse_set(&self, csv: &str) -> Result<NodeSet> {
        let index = self.index();
        let mut set = NodeSet::empty(self.n());
        for label in csv.split(',').map(str::trim).filter(|l| !l.is_empty()) {
            set.insert(lookup(&index, label)?);
        }
        Ok(set)
    }

    pub fn to_document(&self) -> CascadeDocument {
        CascadeDocument::CascadeSpec {
            nodes: self.labels.clone(),
            probs: self
                .nodes
                .iter()
                .enumerate()
                .filter(|(_, node)| node.degree() > 0)
                .map(|(v, node)| {
                    let row = node
                        .neighbors
                        .iter()
                        .enumerate()
                        .map(|(i, &w)| (self.labels[w].clone(), collapse_probs(&node.probs[i], i)))
                        .collect();
                    (self.labels[v].clone(), row)
                })
                .collect(),
        }
    }
}

/// Edge-probability independent cascade.
#[derive(Debug, Clone, PartialEq)]
pub struct IndependentCascade {
    labels: Vec<String>,
    /// `(source, target, probability)`.
    edges: Vec<(NodeId, NodeId, f64)>,
}

impl IndependentCascade {
    pub fn new(labels: Vec<String>, edges: Vec<(NodeId, NodeId, f64)>) -> Result<Self> {
        let n = labels.len();
        let mut seen = std::collections::HashSet::new();
        for &(w, v, p) in &edges {
            if w >= n || v >= n || w == v {
                return Err(Error::InvalidArgument(format!("bad edge ({w}, {v})")));
            }
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::OutOfRange { node: labels[v].clone(), value: p });
            }
            if !seen.insert((w, v)) {
                return Err(Error::InvalidArgument(format!("duplicate edge {} -> {}", labels[w], labels[v])));
            }
        }
        Ok(IndependentCascade { labels, edges })
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn edges(&self) -> &[(NodeId, NodeId, f64)] {
        &self.edges
    }

    /// The same model as a tabulated cascade with `p_v(w, S) = p_{w,v}`.
    pub fn to_cascade_spec(&self) -> Result<CascadeSpec> {
        let n = self.n();
        let mut incoming: Vec<Vec<(NodeId, f64)>> = vec![Vec::new(); n];
        for &(w, v, p) in &self.edges {
            incoming[v].push((w, p));
        }
        let nodes = incoming
            .into_iter()
            .map(|mut inc| {
                inc.sort_by_key(|&(w, _)| w);
                let k = inc.len();
                if k > MAX_CASCADE_NEIGHBORS {
                    return Err(Error::DomainTooLarge { size: k, limit: MAX_CASCADE_NEIGHBORS });
                }
                Ok(CascadeNode {
                    neighbors: inc.iter().map(|&(w, _)| w).collect(),
                    probs: inc
                        .iter()
                        .enumerate()
                        .map(|(i, &(_, p))| (0..1usize << k).map(|m| if m >> i & 1 == 1 { 0.0 } else { p }).collect())
                        .collect(),
                    unreachable: vec![false; 1 << k],
                })
            })
            .collect::<Result<Vec<_>>>()?;
        CascadeSpec::new(self.labels.clone(), nodes)
    }
}

/// Cascade files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", deny_unknown_fields)]
pub enum CascadeDocument {
    /// Neighbors of `v` are the keys of `probs[v]`, in node-list order; bitmasks
    /// index that ordered list.
    #[serde(rename = "cascade-spec")]
    CascadeSpec { nodes: Vec<String>, probs: BTreeMap<String, BTreeMap<String, ProbEntry>> },
    #[serde(rename = "ic")]
    Ic {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        nodes: Option<Vec<String>>,
        edges: Vec<(String, String, f64)>,
    },
}

/// A parsed cascade file.
#[derive(Debug, Clone, PartialEq)]
pub enum CascadeModel {
    Tabulated(CascadeSpec),
    Independent(IndependentCascade),
}

impl CascadeModel {
    pub fn spec(&self) -> Result<CascadeSpec> {
        match self {
            CascadeModel::Tabulated(spec) => Ok(spec.clone()),
            CascadeModel::Independent(ic) => ic.to_cascade_spec(),
        }
    }
}

pub fn load_cascade(document: &str) -> Result<CascadeModel> {
    let doc: CascadeDocument = serde_json::from_str(document).map_err(|e| Error::Parse(e.to_string()))?;
    match doc {
        CascadeDocument::CascadeSpec { nodes, probs } => {
            let index: HashMap<String, NodeId> = nodes.iter().enumerate().map(|(i, l)| (l.clone(), i)).collect();
            if index.len() != nodes.len() {
                return Err(Error::DuplicateLabel("in cascade-spec nodes".into()));
            }
            let mut table: Vec<CascadeNode> = (0..nodes.len())
                .map(|_| CascadeNode { neighbors: vec![], probs: vec![], unreachable: vec![false] })
                .collect();
            for (v_label, row) in &probs {
                let v = lookup(&index, v_label)?;
                let mut neighbors = row.keys().map(|w| lookup(&index, w)).collect::<Result<Vec<_>>>()?;
                neighbors.sort_unstable();
                let k = neighbors.len();
                if k > MAX_CASCADE_NEIGHBORS {
                    return Err(Error::DomainTooLarge { size: k, limit: MAX_CASCADE_NEIGHBORS });
                }
                let rows = neighbors
                    .iter()
                    .enumerate()
                    .map(|(i, &w)| expand_probs(v_label, &nodes[w], k, i, &row[&nodes[w]]))
                    .collect::<Result<Vec<_>>>()?;
                table[v] = CascadeNode { neighbors, probs: rows, unreachable: vec![false; 1 << k] };
            }
            Ok(CascadeModel::Tabulated(CascadeSpec::new(nodes, table)?))
        }
        CascadeDocument::Ic { nodes, edges } => {
            let labels = match nodes {
                Some(nodes) => nodes,
                None => {
                    let mut labels: Vec<String> = Vec::new();
                    for (w, v, _) in &edges {
                        for l in [w, v] {
                            if !labels.contains(l) {
                                labels.push(l.clone());
                            }
                        }
                    }
                    labels
                }
            };
            let index: HashMap<String, NodeId> = labels.iter().enumerate().map(|(i, l)| (l.clone(), i)).collect();
            if index.len() != labels.len() {
                return Err(Error::DuplicateLabel("in ic nodes".into()));
            }
            let edges = edges
                .iter()
                .map(|(w, v, p)| Ok((lookup(&index, w)?, lookup(&index, v)?, *p)))
                .collect::<Result<Vec<_>>>()?;
            Ok(CascadeModel::Independent(IndependentCascade::new(labels, edges)?))
        }
    }
}

/// Maps every threshold activation to cascade success probabilities.
pub fn threshold_to_cascade(net: &SocialNetwork) -> Result<CascadeSpec> {
    let nodes = net
        .activations()
        .iter()
        .enumerate()
        .map(|(v, f)| {
            let k = f.neighbors().len();
            if k > MAX_CASCADE_NEIGHBORS {
                return Err(Error::DomainTooLarge { size: k, limit: MAX_CASCADE_NEIGHBORS });
            }
            let values: Vec<f64> = (0..1u64 << k).map(|m| f.eval_local(m)).collect();
            let unreachable: Vec<bool> = values.iter().map(|&x| x >= 1.0 - 1e-12).collect();
            let probs = (0..k)
                .map(|i| {
                    (0..1usize << k)
                        .map(|m| {
                            if m >> i & 1 == 1 {
                                return Ok(0.0);
                            }
                            if unreachable[m] {
                                return Ok(1.0);
                            }
                            let p = (values[m | 1 << i] - values[m]) / (1.0 - values[m]);
                            if p < -TOLERANCE {
                                return Err(Error::NonMonotone {
                                    node: net.label(v).to_string(),
                                    detail: format!("negative margin at mask {m}"),
                                });
                            }
                            Ok(p.clamp(0.0, 1.0))
                        })
                        .collect::<Result<Vec<f64>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(CascadeNode { neighbors: f.neighbors().to_vec(), probs, unreachable })
        })
        .collect::<Result<Vec<_>>>()?;
    CascadeSpec::new(net.labels().to_vec(), nodes)
}

/// Builds the threshold network whose activations are the cascade products.
///
/// Order-independence is verified for every node with at most
/// [`MAX_ORDER_CHECK_NEIGHBORS`] neighbors; wider nodes are taken on trust.
pub fn cascade_to_threshold(spec: &CascadeSpec) -> Result<SocialNetwork> {
    let activations = spec
        .nodes
        .iter()
        .enumerate()
        .map(|(v, node)| {
            if node.degree() <= MAX_ORDER_CHECK_NEIGHBORS {
                let reachable_p = |i: usize, m: u64| node.probs[i][m as usize];
                if let Some(detail) = order_dependence(node.degree(), reachable_p) {
                    return Err(Error::OrderDependent { node: spec.labels[v].clone(), detail });
                }
            }
            Ok(Activation::Cascade { neighbors: node.neighbors.clone(), probs: node.probs.clone() })
        })
        .collect::<Result<Vec<_>>>()?;
    SocialNetwork::new(spec.labels.clone(), activations, WeightFunction::Cardinality)
}

/// Simulates the cascade from `seeds` and returns the terminal active set.
pub fn run_cascade<R: Rng + ?Sized>(spec: &CascadeSpec, seeds: &NodeSet, rng: &mut R) -> NodeSet {
    let targets = spec.targets();
    let mut failed = vec![0u64; spec.n()];
    let mut active = seeds.clone();
    let mut frontier: Vec<NodeId> = seeds.iter().collect();
    while !frontier.is_empty() {
        let mut newly = NodeSet::empty(spec.n());
        for &w in &frontier {
            for &(v, i) in &targets[w] {
                if active.contains(v) || newly.contains(v) {
                    continue;
                }
                if rng.gen::<f64>() < spec.prob(v, i, failed[v]) {
                    newly.insert(v);
                } else {
                    failed[v] |= 1 << i;
                }
            }
        }
        active.union_with(&newly);
        frontier = newly.iter().collect();
    }
    active
}

/// Exact terminal distribution of the cascade, by branching on every attempt.
pub fn exact_cascade_distribution(spec: &CascadeSpec, seeds: &NodeSet, cap: usize) -> Result<BTreeMap<u64, f64>> {
    let n = spec.n();
    if n > cap.min(63) {
        return Err(Error::DomainTooLarge { size: n, limit: cap.min(63) });
    }
    struct Walk<'a> {
        spec: &'a CascadeSpec,
        targets: Vec<Vec<(NodeId, usize)>>,
        terminal: BTreeMap<u64, f64>,
    }
    impl Walk<'_> {
        fn step(&mut self, active: u64, frontier: u64, failed: &mut Vec<u64>, mass: f64) {
            if frontier == 0 {
                *self.terminal.entry(active).or_insert(0.0) += mass;
                return;
            }
            let attempts: Vec<(NodeId, usize)> = (0..self.spec.n())
                .filter(|w| frontier >> w & 1 == 1)
                .flat_map(|w| self.targets[w].iter().copied())
                .collect();
            self.attempt(&attempts, 0, active, 0, failed, mass);
        }

        fn attempt(
            &mut self,
            attempts: &[(NodeId, usize)],
            at: usize,
            active: u64,
            newly: u64,
            failed: &mut Vec<u64>,
            mass: f64,
        ) {
            let Some(&(v, i)) = attempts.get(at) else {
                self.step(active | newly, newly, failed, mass);
                return;
            };
            if (active | newly) >> v & 1 == 1 {
                self.attempt(attempts, at + 1, active, newly, failed, mass);
                return;
            }
            let p = self.spec.prob(v, i, failed[v]);
            if p > 0.0 {
                self.attempt(attempts, at + 1, active, newly | 1 << v, failed, mass * p);
            }
            if p < 1.0 {
                let saved = failed[v];
                failed[v] |= 1 << i;
                self.attempt(attempts, at + 1, active, newly, failed, mass * (1.0 - p));
                failed[v] = saved;
            }
        }
    }
    let mut walk = Walk { spec, targets: spec.targets(), terminal: BTreeMap::new() };
    let seeds = seeds.to_mask();
    walk.step(seeds, seeds, &mut vec![0u64; n], 1.0);
    Ok(walk.terminal)
}

/// Samples live edges and returns the nodes reachable from `seeds` through them.
///
/// Edges are sampled in the order they are stored.
pub fn run_live_edge_ic<R: Rng + ?Sized>(ic: &IndependentCascade, seeds: &NodeSet, rng: &mut R) -> NodeSet {
    let mut live: Vec<Vec<NodeId>> = vec![Vec::new(); ic.n()];
    for &(w, v, p) in &ic.edges {
        if rng.gen::<f64>() < p {
            live[w].push(v);
        }
    }
    let mut reached = seeds.clone();
    let mut queue: VecDeque<NodeId> = seeds.iter().collect();
    while let Some(w) = queue.pop_front() {
        for &v in &live[w] {
            if !reached.contains(v) {
                reached.insert(v);
                queue.push_back(v);
            }
        }
    }
    reached
}

/// A pair `S ⊆ T` with `p_v(w, S) < p_v(w, T)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecreasingViolation {
    pub node: NodeId,
    pub neighbor: NodeId,
    /// Failed sets as bitmasks over the node's neighbor list.
    pub smaller: u64,
    pub larger: u64,
    pub p_smaller: f64,
    pub p_larger: f64,
}

/// Checks `p_v(w, S) >= p_v(w, T)` for all `S ⊆ T` (unreachable states skipped).
/// Returns the first violation found.
pub fn check_decreasing(spec: &CascadeSpec) -> Option<DecreasingViolation> {
    (0..spec.n()).find_map(|v| check_decreasing_node(spec, v))
}

/// [`check_decreasing`] restricted to the probabilities of node `v`.
pub fn check_decreasing_node(spec: &CascadeSpec, v: NodeId) -> Option<DecreasingViolation> {
    let node = &spec.nodes[v];
    let k = node.degree();
    for i in 0..k {
        for s in (0..1u64 << k).filter(|s| s >> i & 1 == 0) {
            for u in (0..k).filter(|&u| u != i && s >> u & 1 == 0) {
                let t = s | 1 << u;
                if node.unreachable[t as usize] {
                    continue;
                }
                let (ps, pt) = (node.probs[i][s as usize], node.probs[i][t as usize]);
                if ps < pt - TOLERANCE {
                    return Some(DecreasingViolation {
                        node: v,
                        neighbor: node.neighbors[i],
                        smaller: s,
                        larger: t,
                        p_smaller: ps,
                        p_larger: pt,
                    });
                }
            }
        }
    }
    None
}

/// Largest discrepancy between two specs over reachable entries, or `None` when
/// their shapes differ.
pub fn max_prob_difference(a: &CascadeSpec, b: &CascadeSpec) -> Option<f64> {
    if a.n() != b.n() {
        return None;
    }
    let mut worst = 0.0f64;
    for (x, y) in a.nodes.iter().zip(&b.nodes) {
        if x.neighbors != y.neighbors {
            return None;
        }
        for i in 0..x.degree() {
            for m in (0..1usize << x.degree()).filter(|m| m >> i & 1 == 0) {
                if x.unreachable[m] || y.unreachable[m] {
                    continue;
                }
                worst = worst.max((x.probs[i][m] - y.probs[i][m]).abs());
            }
        }
    }
    Some(worst)
}

/// Overall activation probability of `v` once the neighbors in `mask` have tried.
pub fn overall_probability(spec: &CascadeSpec, v: NodeId, mask: u64) -> f64 {
    spec.nodes[v].overall(mask)
}

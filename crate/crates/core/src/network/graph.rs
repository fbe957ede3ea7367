use std::collections::VecDeque;

use super::activation::{Activation, MAX_TABLE_NEIGHBORS};
use super::SocialNetwork;
use crate::set::NodeId;

/// Influence support graph: an edge `w -> v` means `w` can change `f_v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InfluenceGraph {
    out: Vec<Vec<NodeId>>,
}

impl InfluenceGraph {
    pub fn n(&self) -> usize {
        self.out.len()
    }

    pub fn successors(&self, w: NodeId) -> &[NodeId] {
        &self.out[w]
    }

    pub fn out_degree(&self, w: NodeId) -> usize {
        self.out[w].len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.out.iter().enumerate().flat_map(|(w, vs)| vs.iter().map(move |&v| (w, v)))
    }

    pub fn edge_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    /// Breadth-first hop distances from `source`; `None` for unreachable nodes.
    pub fn distances_from(&self, source: NodeId) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n()];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(w) = queue.pop_front() {
            let d = dist[w].unwrap();
            for &v in &self.out[w] {
                if dist[v].is_none() {
                    dist[v] = Some(d + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }
}

/// Whether neighbor number `bit` ever changes the value of `f`.
fn has_marginal_effect(f: &Activation, bit: usize) -> bool {
    let degree = f.neighbors().len();
    if degree <= MAX_TABLE_NEIGHBORS {
        return (0..1u64 << degree)
            .filter(|m| m >> bit & 1 == 0)
            .any(|m| f.eval_local(m | 1 << bit) != f.eval_local(m));
    }
    // Only linear activations (possibly composed) can be this wide.
    match f {
        Activation::Linear { weights, .. } => weights[bit] != 0.0,
        Activation::Composed { inner, .. } => has_marginal_effect(inner, bit),
        _ => true,
    }
}

/// Builds the support graph of `net`.
pub fn derive_graph(net: &SocialNetwork) -> InfluenceGraph {
    let mut out = vec![Vec::new(); net.n()];
    for v in 0..net.n() {
        let f = net.activation(v);
        for (bit, &w) in f.neighbors().iter().enumerate() {
            if has_marginal_effect(f, bit) {
                out[w].push(v);
            }
        }
    }
    for succ in &mut out {
        succ.sort_unstable();
    }
    InfluenceGraph { out }
}

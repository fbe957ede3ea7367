use itertools::Itertools;

use super::cdf::ThresholdCdf;
use crate::error::{Error, Result};
use crate::set::{NodeId, NodeSet};

/// Largest neighbor list a table (or tabulated cascade) activation may have.
pub const MAX_TABLE_NEIGHBORS: usize = 20;

/// Neighbor count above which cascade order-independence is not checked.
pub const MAX_ORDER_CHECK_NEIGHBORS: usize = 8;

const TOL: f64 = 1e-9;

/// A `[0, 1]`-valued set function of a node's neighbors.
#[derive(Debug, Clone, PartialEq)]
pub enum Activation {
    /// `f(S) = sum of weights[i] over neighbors[i] in S`.
    Linear { neighbors: Vec<NodeId>, weights: Vec<f64> },
    /// One value per neighbor subset, bit `i` of the index standing for `neighbors[i]`.
    Table { neighbors: Vec<NodeId>, values: Vec<f64> },
    /// `probs[i][mask]` is the chance that `neighbors[i]` activates the node after the
    /// neighbors in `mask` tried and failed. Entries whose mask contains bit `i` are unused.
    Cascade { neighbors: Vec<NodeId>, probs: Vec<Vec<f64>> },
    /// `cdf(inner(S))`.
    Composed { inner: Box<Activation>, cdf: ThresholdCdf },
}

impl Activation {
    /// The constant-zero activation.
    pub fn zero() -> Self {
        Activation::Linear { neighbors: Vec::new(), weights: Vec::new() }
    }

    pub fn neighbors(&self) -> &[NodeId] {
        match self {
            Activation::Linear { neighbors, .. }
            | Activation::Table { neighbors, .. }
            | Activation::Cascade { neighbors, .. } => neighbors,
            Activation::Composed { inner, .. } => inner.neighbors(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Activation::Linear { .. } => "linear",
            Activation::Table { .. } => "table",
            Activation::Cascade { .. } => "cascade",
            Activation::Composed { .. } => "composed",
        }
    }

    /// Bitmask of `set` restricted to the neighbor list.
    pub fn local_mask(&self, set: &NodeSet) -> u64 {
        let neighbors = self.neighbors();
        assert!(neighbors.len() < 64, "local masks need fewer than 64 neighbors");
        neighbors.iter().enumerate().filter(|(_, &w)| set.contains(w)).fold(0u64, |m, (i, _)| m | 1 << i)
    }

    /// `f(N(v) ∩ set)`.
    pub fn eval(&self, set: &NodeSet) -> f64 {
        match self {
            Activation::Linear { neighbors, weights } => {
                neighbors.iter().zip(weights).filter(|(&w, _)| set.contains(w)).map(|(_, b)| b).sum()
            }
            Activation::Composed { inner, cdf } => cdf.eval(inner.eval(set)),
            _ => self.eval_local(self.local_mask(set)),
        }
    }

    /// Evaluates on a neighbor-local bitmask.
    pub fn eval_local(&self, mask: u64) -> f64 {
        match self {
            Activation::Linear { weights, .. } => {
                weights.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, b)| b).sum()
            }
            Activation::Table { values, .. } => values[mask as usize],
            Activation::Cascade { neighbors, probs } => {
                cascade_product(neighbors.len(), mask, |i, prefix| probs[i][prefix as usize])
            }
            Activation::Composed { inner, cdf } => cdf.eval(inner.eval_local(mask)),
        }
    }

    /// Checks the structural invariants; `strict` adds monotonicity of tables and
    /// order-independence of cascade probabilities.
    pub fn validate(&self, node: &str, strict: bool) -> Result<()> {
        let invalid = |reason: String| Error::InvalidActivation { node: node.to_string(), reason };
        let neighbors = self.neighbors();
        if neighbors.iter().duplicates().next().is_some() {
            return Err(invalid("duplicate neighbor".into()));
        }
        match self {
            Activation::Linear { neighbors, weights } => {
                if neighbors.len() != weights.len() {
                    return Err(invalid("weights and neighbors differ in length".into()));
                }
                for &b in weights {
                    if !(b >= 0.0) || !b.is_finite() {
                        return Err(invalid(format!("negative or non-finite weight {b}")));
                    }
                }
                let total: f64 = weights.iter().sum();
                if total > 1.0 + 1e-12 {
                    return Err(invalid(format!("weights sum to {total} > 1")));
                }
            }
            Activation::Table { neighbors, values } => {
                if neighbors.len() > MAX_TABLE_NEIGHBORS {
                    return Err(Error::DomainTooLarge { size: neighbors.len(), limit: MAX_TABLE_NEIGHBORS });
                }
                if values.len() != 1 << neighbors.len() {
                    return Err(invalid(format!(
                        "table has {} values, expected {}",
                        values.len(),
                        1usize << neighbors.len()
                    )));
                }
                if values[0] != 0.0 {
                    return Err(Error::EmptySetValue { node: node.to_string(), value: values[0] });
                }
                if let Some(&v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                    return Err(Error::OutOfRange { node: node.to_string(), value: v });
                }
                if strict {
                    for mask in 0..values.len() {
                        for i in 0..neighbors.len() {
                            let up = mask | 1 << i;
                            if values[up] < values[mask] - TOL {
                                return Err(Error::NonMonotone {
                                    node: node.to_string(),
                                    detail: format!("value at mask {up} below value at mask {mask}"),
                                });
                            }
                        }
                    }
                }
            }
            Activation::Cascade { neighbors, probs } => {
                if neighbors.len() > MAX_TABLE_NEIGHBORS {
                    return Err(Error::DomainTooLarge { size: neighbors.len(), limit: MAX_TABLE_NEIGHBORS });
                }
                if probs.len() != neighbors.len() || probs.iter().any(|row| row.len() != 1 << neighbors.len()) {
                    return Err(invalid("probability table has the wrong shape".into()));
                }
                for (i, row) in probs.iter().enumerate() {
                    for (mask, &p) in row.iter().enumerate() {
                        if mask >> i & 1 == 0 && !(0.0..=1.0).contains(&p) {
                            return Err(Error::OutOfRange { node: node.to_string(), value: p });
                        }
                    }
                }
                if strict && neighbors.len() <= MAX_ORDER_CHECK_NEIGHBORS {
                    if let Some(detail) = order_dependence(neighbors.len(), |i, m| probs[i][m as usize]) {
                        return Err(Error::OrderDependent { node: node.to_string(), detail });
                    }
                }
            }
            Activation::Composed { inner, .. } => {
                if matches!(**inner, Activation::Composed { .. }) {
                    return Err(invalid("nested composition is not supported".into()));
                }
                inner.validate(node, strict)?;
            }
        }
        Ok(())
    }
}

/// `1 - prod (1 - p(w_i, {w_1..w_{i-1}}))` over the set bits of `mask` in index order.
pub(crate) fn cascade_product(degree: usize, mask: u64, p: impl Fn(usize, u64) -> f64) -> f64 {
    let mut survive = 1.0;
    let mut prefix = 0u64;
    for i in 0..degree {
        if mask >> i & 1 == 1 {
            survive *= 1.0 - p(i, prefix);
            prefix |= 1 << i;
        }
    }
    1.0 - survive
}

/// Looks for a neighbor subset whose overall success probability depends on the
/// order of attempts. Returns a description of the first one found.
pub(crate) fn order_dependence(degree: usize, p: impl Fn(usize, u64) -> f64) -> Option<String> {
    for mask in 1u64..1 << degree {
        let members: Vec<usize> = (0..degree).filter(|i| mask >> i & 1 == 1).collect();
        if members.len() < 2 {
            continue;
        }
        let canonical = cascade_product(degree, mask, &p);
        for order in members.iter().copied().permutations(members.len()) {
            let mut survive = 1.0;
            let mut prefix = 0u64;
            for &i in &order {
                survive *= 1.0 - p(i, prefix);
                prefix |= 1 << i;
            }
            let value = 1.0 - survive;
            if (value - canonical).abs() > TOL {
                return Some(format!("order {order:?} gives {value}, canonical order gives {canonical}"));
            }
        }
    }
    None
}

//! JSON network documents.
//!
//! ```json
//! {
//!   "nodes": ["a", "b", "c"],
//!   "activations": {
//!     "b": {"type": "linear", "weights": {"a": 0.5}},
//!     "c": {"type": "table", "neighbors": ["a", "b"], "values": [0, 0.3, 0.3, 0.5]}
//!   },
//!   "weight_function": {"type": "cardinality"}
//! }
//! ```
//!
//! Nodes without an entry in `activations` get the constant-zero activation.
//! Cascade probabilities are keyed by neighbor label; each value is either a
//! constant or a map from decimal bitmask (over the neighbor list) to probability.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::activation::Activation;
use super::cdf::ThresholdCdf;
use super::weight::WeightFunction;
use crate::error::{Error, Result};
use crate::set::NodeId;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkDocument {
    pub nodes: Vec<String>,
    #[serde(default)]
    pub activations: BTreeMap<String, ActivationDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight_function: Option<WeightDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ActivationDoc {
    Linear { weights: BTreeMap<String, f64> },
    Table { neighbors: Vec<String>, values: Vec<f64> },
    Cascade { neighbors: Vec<String>, probs: BTreeMap<String, ProbEntry> },
    Composed { inner: Box<ActivationDoc>, cdf: CdfDoc },
}

/// Success probabilities of one neighbor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProbEntry {
    Constant(f64),
    ByMask(BTreeMap<String, f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CdfDoc {
    pub points: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum WeightDoc {
    Cardinality,
    Linear { weights: BTreeMap<String, f64> },
    Table { values: Vec<f64> },
}

pub(crate) fn lookup(index: &HashMap<String, NodeId>, label: &str) -> Result<NodeId> {
    index.get(label).copied().ok_or_else(|| Error::UnknownNode(label.to_string()))
}

/// Expands one neighbor's probability entry to a full `2^degree` row.
pub(crate) fn expand_probs(
    node: &str,
    neighbor: &str,
    degree: usize,
    bit: usize,
    entry: &ProbEntry,
) -> Result<Vec<f64>> {
    let size = 1usize << degree;
    match entry {
        ProbEntry::Constant(p) => Ok((0..size).map(|m| if m >> bit & 1 == 1 { 0.0 } else { *p }).collect()),
        ProbEntry::ByMask(map) => {
            let mut row = vec![f64::NAN; size];
            for (key, &p) in map {
                let mask: usize = key
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("node `{node}`: bad bitmask key `{key}` for `{neighbor}`")))?;
                if mask >= size || mask >> bit & 1 == 1 {
                    return Err(Error::InvalidActivation {
                        node: node.to_string(),
                        reason: format!("bitmask {mask} invalid for neighbor `{neighbor}`"),
                    });
                }
                row[mask] = p;
            }
            for (mask, p) in row.iter_mut().enumerate() {
                if mask >> bit & 1 == 1 {
                    *p = 0.0;
                } else if p.is_nan() {
                    return Err(Error::InvalidActivation {
                        node: node.to_string(),
                        reason: format!("missing probability for `{neighbor}` at bitmask {mask}"),
                    });
                }
            }
            Ok(row)
        }
    }
}

/// Collapses a probability row to a constant when it does not depend on the mask.
pub(crate) fn collapse_probs(row: &[f64], bit: usize) -> ProbEntry {
    let mut used = row.iter().enumerate().filter(|(m, _)| m >> bit & 1 == 0).map(|(_, p)| *p);
    let first = used.next().unwrap_or(0.0);
    if used.all(|p| p == first) {
        ProbEntry::Constant(first)
    } else {
        ProbEntry::ByMask(
            row.iter().enumerate().filter(|(m, _)| m >> bit & 1 == 0).map(|(m, p)| (m.to_string(), *p)).collect(),
        )
    }
}

impl ActivationDoc {
    pub(crate) fn resolve(&self, node: &str, index: &HashMap<String, NodeId>) -> Result<Activation> {
        let labels_to_ids = |labels: &[String]| labels.iter().map(|l| lookup(index, l)).collect::<Result<Vec<_>>>();
        Ok(match self {
            ActivationDoc::Linear { weights } => {
                let mut pairs =
                    weights.iter().map(|(label, &b)| Ok((lookup(index, label)?, b))).collect::<Result<Vec<_>>>()?;
                pairs.sort_by_key(|&(id, _)| id);
                let (neighbors, weights) = pairs.into_iter().unzip();
                Activation::Linear { neighbors, weights }
            }
            ActivationDoc::Table { neighbors, values } => {
                Activation::Table { neighbors: labels_to_ids(neighbors)?, values: values.clone() }
            }
            ActivationDoc::Cascade { neighbors, probs } => {
                let ids = labels_to_ids(neighbors)?;
                for key in probs.keys() {
                    if !neighbors.contains(key) {
                        return Err(Error::InvalidActivation {
                            node: node.to_string(),
                            reason: format!("probabilities given for non-neighbor `{key}`"),
                        });
                    }
                }
                let rows = neighbors
                    .iter()
                    .enumerate()
                    .map(|(bit, label)| {
                        let entry = probs.get(label).ok_or_else(|| Error::InvalidActivation {
                            node: node.to_string(),
                            reason: format!("missing probabilities for `{label}`"),
                        })?;
                        expand_probs(node, label, neighbors.len(), bit, entry)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Activation::Cascade { neighbors: ids, probs: rows }
            }
            ActivationDoc::Composed { inner, cdf } => Activation::Composed {
                inner: Box::new(inner.resolve(node, index)?),
                cdf: ThresholdCdf::new(cdf.points.iter().map(|p| (p[0], p[1])).collect())?,
            },
        })
    }

    pub(crate) fn from_activation(f: &Activation, labels: &[String]) -> Self {
        let names = |ids: &[NodeId]| ids.iter().map(|&id| labels[id].clone()).collect::<Vec<_>>();
        match f {
            Activation::Linear { neighbors, weights } => ActivationDoc::Linear {
                weights: neighbors.iter().zip(weights).map(|(&id, &b)| (labels[id].clone(), b)).collect(),
            },
            Activation::Table { neighbors, values } => {
                ActivationDoc::Table { neighbors: names(neighbors), values: values.clone() }
            }
            Activation::Cascade { neighbors, probs } => ActivationDoc::Cascade {
                neighbors: names(neighbors),
                probs: neighbors
                    .iter()
                    .enumerate()
                    .map(|(bit, &id)| (labels[id].clone(), collapse_probs(&probs[bit], bit)))
                    .collect(),
            },
            Activation::Composed { inner, cdf } => ActivationDoc::Composed {
                inner: Box::new(Self::from_activation(inner, labels)),
                cdf: CdfDoc { points: cdf.points().iter().map(|&(x, y)| [x, y]).collect() },
            },
        }
    }
}

impl WeightDoc {
    pub(crate) fn resolve(&self, n: usize, index: &HashMap<String, NodeId>) -> Result<WeightFunction> {
        Ok(match self {
            WeightDoc::Cardinality => WeightFunction::Cardinality,
            WeightDoc::Linear { weights } => {
                let mut per_node = vec![0.0; n];
                for (label, &w) in weights {
                    per_node[lookup(index, label)?] = w;
                }
                WeightFunction::Linear(per_node)
            }
            WeightDoc::Table { values } => WeightFunction::Table(values.clone()),
        })
    }

    pub(crate) fn from_weight(w: &WeightFunction, labels: &[String]) -> Self {
        match w {
            WeightFunction::Cardinality => WeightDoc::Cardinality,
            WeightFunction::Linear(ws) => {
                WeightDoc::Linear { weights: labels.iter().cloned().zip(ws.iter().copied()).collect() }
            }
            WeightFunction::Table(values) => WeightDoc::Table { values: values.clone() },
        }
    }
}

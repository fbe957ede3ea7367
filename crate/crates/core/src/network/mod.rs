//! Social networks: node labels, one activation function per node and a weight
//! function on terminal sets.

mod activation;
mod cdf;
mod document;
mod graph;
mod properties;
mod weight;

use std::collections::HashMap;
use std::path::Path;

pub use activation::{Activation, MAX_ORDER_CHECK_NEIGHBORS, MAX_TABLE_NEIGHBORS};
pub use cdf::ThresholdCdf;
pub use document::{ActivationDoc, CdfDoc, NetworkDocument, ProbEntry, WeightDoc};
pub use graph::{derive_graph, InfluenceGraph};
pub use properties::{
    check_properties, check_set_function, check_weight_properties, cross_margin_violation, normalized_margin,
    CrossMarginViolation, PropertyReport, Violation, TOLERANCE,
};
pub use weight::{WeightFunction, MAX_TABLE_UNIVERSE};

pub(crate) use activation::{cascade_product, order_dependence};
pub(crate) use document::{collapse_probs, expand_probs, lookup};

use crate::error::{Error, Result};
use crate::set::{NodeId, NodeSet};

/// Load-time options.
#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    /// Reject non-monotone tables and order-dependent cascade activations.
    pub strict: bool,
}

/// A validated, immutable social network.
#[derive(Debug, Clone, PartialEq)]
pub struct SocialNetwork {
    labels: Vec<String>,
    index: HashMap<String, NodeId>,
    activations: Vec<Activation>,
    weight: WeightFunction,
}

impl SocialNetwork {
    pub fn new(labels: Vec<String>, activations: Vec<Activation>, weight: WeightFunction) -> Result<Self> {
        Self::with_options(labels, activations, weight, LoadOptions::default())
    }

    pub fn with_options(
        labels: Vec<String>,
        activations: Vec<Activation>,
        weight: WeightFunction,
        options: LoadOptions,
    ) -> Result<Self> {
        let n = labels.len();
        let mut index = HashMap::with_capacity(n);
        for (id, label) in labels.iter().enumerate() {
            if index.insert(label.clone(), id).is_some() {
                return Err(Error::DuplicateLabel(label.clone()));
            }
        }
        if activations.len() != n {
            return Err(Error::Parse(format!("{} activations for {n} nodes", activations.len())));
        }
        for (v, f) in activations.iter().enumerate() {
            if let Some(&w) = f.neighbors().iter().find(|&&w| w >= n) {
                return Err(Error::UnknownNode(format!("#{w}")));
            }
            f.validate(&labels[v], options.strict)?;
            let at_empty = f.eval_local(0);
            if at_empty != 0.0 {
                return Err(Error::EmptySetValue { node: labels[v].clone(), value: at_empty });
            }
        }
        weight.validate(n)?;
        Ok(SocialNetwork { labels, index, activations, weight })
    }

    /// Network with default labels `"0"`, `"1"`, ...
    pub fn unlabeled(activations: Vec<Activation>, weight: WeightFunction) -> Result<Self> {
        let labels = (0..activations.len()).map(|i| i.to_string()).collect();
        Self::new(labels, activations, weight)
    }

    pub fn from_document(doc: &NetworkDocument, options: LoadOptions) -> Result<Self> {
        let mut index = HashMap::new();
        for (id, label) in doc.nodes.iter().enumerate() {
            if index.insert(label.clone(), id).is_some() {
                return Err(Error::DuplicateLabel(label.clone()));
            }
        }
        let mut activations = vec![Activation::zero(); doc.nodes.len()];
        for (label, spec) in &doc.activations {
            let v = lookup(&index, label)?;
            activations[v] = spec.resolve(label, &index)?;
        }
        let weight = match &doc.weight_function {
            Some(w) => w.resolve(doc.nodes.len(), &index)?,
            None => WeightFunction::Cardinality,
        };
        Self::with_options(doc.nodes.clone(), activations, weight, options)
    }

    pub fn to_document(&self) -> NetworkDocument {
        NetworkDocument {
            nodes: self.labels.clone(),
            activations: self
                .activations
                .iter()
                .enumerate()
                .filter(|(_, f)| !f.neighbors().is_empty())
                .map(|(v, f)| (self.labels[v].clone(), ActivationDoc::from_activation(f, &self.labels)))
                .collect(),
            weight_function: match self.weight {
                WeightFunction::Cardinality => None,
                ref w => Some(WeightDoc::from_weight(w, &self.labels)),
            },
        }
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, v: NodeId) -> &str {
        &self.labels[v]
    }

    pub fn id(&self, label: &str) -> Option<NodeId> {
        self.index.get(label).copied()
    }

    pub fn activations(&self) -> &[Activation] {
        &self.activations
    }

    pub fn activation(&self, v: NodeId) -> &Activation {
        &self.activations[v]
    }

    /// `f_v(N(v) ∩ set)`.
    pub fn eval_activation(&self, v: NodeId, set: &NodeSet) -> f64 {
        self.activations[v].eval(set)
    }

    pub fn weight(&self) -> &WeightFunction {
        &self.weight
    }

    /// Same network with a different weight function.
    pub fn with_weight(&self, weight: WeightFunction) -> Result<Self> {
        weight.validate(self.n())?;
        Ok(SocialNetwork { weight, ..self.clone() })
    }

    /// Same network with different activations (validated, non-strict).
    pub fn with_activations(&self, activations: Vec<Activation>) -> Result<Self> {
        Self::new(self.labels.clone(), activations, self.weight.clone())
    }

    pub fn empty_set(&self) -> NodeSet {
        NodeSet::empty(self.n())
    }

    pub fn full_set(&self) -> NodeSet {
        NodeSet::full(self.n())
    }

    /// Parses a comma-separated label list. Blank input is the empty set.
    pub fn parse_set(&self, csv: &str) -> Result<NodeSet> {
        let mut set = self.empty_set();
        for label in csv.split(',').map(str::trim).filter(|l| !l.is_empty()) {
            set.insert(lookup(&self.index, label)?);
        }
        Ok(set)
    }

    /// Labels of the set members, sorted.
    pub fn set_labels(&self, set: &NodeSet) -> Vec<String> {
        let mut labels: Vec<String> = set.iter().map(|v| self.labels[v].clone()).collect();
        labels.sort();
        labels
    }

    /// Sorted labels joined by `|`.
    pub fn format_set(&self, set: &NodeSet) -> String {
        self.set_labels(set).join("|")
    }
}

/// Parses a network document.
pub fn load_network(document: &str) -> Result<SocialNetwork> {
    load_network_with(document, LoadOptions::default())
}

pub fn load_network_with(document: &str, options: LoadOptions) -> Result<SocialNetwork> {
    let doc: NetworkDocument = serde_json::from_str(document).map_err(|e| Error::Parse(e.to_string()))?;
    SocialNetwork::from_document(&doc, options)
}

pub fn load_network_file(path: impl AsRef<Path>, options: LoadOptions) -> Result<SocialNetwork> {
    load_network_with(&std::fs::read_to_string(path)?, options)
}

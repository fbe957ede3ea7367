use crate::error::{Error, Result};
use crate::set::NodeSet;

/// Largest universe over which a tabulated weight function may be declared.
pub const MAX_TABLE_UNIVERSE: usize = 20;

/// Nonnegative weight `w` of a terminal active set.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum WeightFunction {
    /// `|S|`.
    #[default]
    Cardinality,
    /// Sum of per-node weights.
    Linear(Vec<f64>),
    /// One value per subset of the whole node set, indexed by bitmask over node ids.
    Table(Vec<f64>),
}

impl WeightFunction {
    pub fn eval(&self, set: &NodeSet) -> f64 {
        match self {
            WeightFunction::Cardinality => set.len() as f64,
            WeightFunction::Linear(weights) => set.iter().map(|v| weights[v]).sum(),
            WeightFunction::Table(values) => values[set.to_mask() as usize],
        }
    }

    pub fn eval_mask(&self, mask: u64) -> f64 {
        match self {
            WeightFunction::Cardinality => mask.count_ones() as f64,
            WeightFunction::Linear(weights) => {
                weights.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, w)| w).sum()
            }
            WeightFunction::Table(values) => values[mask as usize],
        }
    }

    /// `w(V) - w(∅)` on a universe of size `n`.
    pub fn range(&self, n: usize) -> f64 {
        self.eval(&NodeSet::full(n)) - self.eval(&NodeSet::empty(n))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            WeightFunction::Cardinality => "cardinality",
            WeightFunction::Linear(_) => "linear",
            WeightFunction::Table(_) => "table",
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            WeightFunction::Cardinality => Ok(()),
            WeightFunction::Linear(weights) => {
                if weights.len() != n {
                    return Err(Error::InvalidWeight(format!("{} node weights for {n} nodes", weights.len())));
                }
                match weights.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
                    Some(w) => Err(Error::InvalidWeight(format!("negative weight {w}"))),
                    None => Ok(()),
                }
            }
            WeightFunction::Table(values) => {
                if n > MAX_TABLE_UNIVERSE {
                    return Err(Error::DomainTooLarge { size: n, limit: MAX_TABLE_UNIVERSE });
                }
                if values.len() != 1 << n {
                    return Err(Error::InvalidWeight(format!(
                        "table has {} values, expected {}",
                        values.len(),
                        1usize << n
                    )));
                }
                match values.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
                    Some(w) => Err(Error::InvalidWeight(format!("negative weight {w}"))),
                    None => Ok(()),
                }
            }
        }
    }
}

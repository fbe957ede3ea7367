//! Node sets over a fixed universe `0..n`.

use std::fmt;

use fixedbitset::FixedBitSet;

/// Dense node index.
pub type NodeId = usize;

/// A subset of the node universe `0..n`.
///
/// Every set carries its universe size; binary operations expect both sides to
/// share it.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeSet(FixedBitSet);

impl NodeSet {
    pub fn empty(n: usize) -> Self {
        NodeSet(FixedBitSet::with_capacity(n))
    }

    pub fn full(n: usize) -> Self {
        let mut bits = FixedBitSet::with_capacity(n);
        bits.insert_range(..);
        NodeSet(bits)
    }

    pub fn from_ids<I: IntoIterator<Item = NodeId>>(n: usize, ids: I) -> Self {
        let mut set = Self::empty(n);
        for id in ids {
            set.insert(id);
        }
        set
    }

    /// Builds a set from the low `n` bits of `mask`.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        assert!(n <= 64, "mask conversion needs n <= 64");
        let mut set = Self::empty(n);
        for id in 0..n {
            if mask >> id & 1 == 1 {
                set.insert(id);
            }
        }
        set
    }

    pub fn to_mask(&self) -> u64 {
        assert!(self.universe() <= 64, "mask conversion needs n <= 64");
        self.iter().fold(0u64, |m, id| m | 1 << id)
    }

    /// Size of the universe this set lives in.
    pub fn universe(&self) -> usize {
        self.0.len()
    }

    pub fn len(&self) -> usize {
        self.0.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_clear()
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.0.contains(id)
    }

    pub fn insert(&mut self, id: NodeId) {
        assert!(id < self.universe(), "node {id} outside universe of size {}", self.universe());
        self.0.insert(id);
    }

    pub fn remove(&mut self, id: NodeId) {
        self.0.set(id, false);
    }

    pub fn iter(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.0.ones()
    }

    pub fn union(&self, other: &NodeSet) -> NodeSet {
        let mut out = self.clone();
        out.0.union_with(&other.0);
        out
    }

    pub fn union_with(&mut self, other: &NodeSet) {
        self.0.union_with(&other.0);
    }

    pub fn intersection(&self, other: &NodeSet) -> NodeSet {
        let mut out = self.clone();
        out.0.intersect_with(&other.0);
        out
    }

    pub fn difference(&self, other: &NodeSet) -> NodeSet {
        let mut out = self.clone();
        out.0.difference_with(&other.0);
        out
    }

    pub fn is_subset(&self, other: &NodeSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn is_disjoint(&self, other: &NodeSet) -> bool {
        self.0.is_disjoint(&other.0)
    }
}

impl fmt::Debug for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mask_round_trip() {
        let s = NodeSet::from_mask(5, 0b10110);
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![1, 2, 4]);
        assert_eq!(s.to_mask(), 0b10110);
        assert_eq!(s.len(), 3);
    }

    #[test]
    fn set_algebra() {
        let a = NodeSet::from_ids(4, [0, 1]);
        let b = NodeSet::from_ids(4, [1, 2]);
        assert_eq!(a.union(&b), NodeSet::from_ids(4, [0, 1, 2]));
        assert_eq!(a.intersection(&b), NodeSet::from_ids(4, [1]));
        assert_eq!(a.difference(&b), NodeSet::from_ids(4, [0]));
        assert!(NodeSet::empty(4).is_subset(&a));
        assert!(!a.is_subset(&b));
        assert_eq!(NodeSet::full(4).len(), 4);
    }
}

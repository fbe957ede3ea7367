//! Brute-force checks of monotonicity, submodularity and normalized
//! submodularity for set functions on small domains.
//!
//! Subsets of the domain `0..m` are bitmasks. Each property is checked on its
//! local (single-element) form, which is equivalent to the global form by
//! chaining covering steps:
//!
//! * monotone: `f(S) <= f(S + u)`
//! * submodular: `f(S + v) - f(S) >= f(T + v) - f(T)` with `T = S + u`
//! * normalized: `(f(S + v) - f(S)) / (1 - f(S)) >= (f(T + v) - f(T)) / (1 - f(T))`
//!
//! All comparisons use an absolute tolerance of `1e-9`.

use serde::Serialize;

use super::activation::{Activation, MAX_TABLE_NEIGHBORS};
use super::weight::{WeightFunction, MAX_TABLE_UNIVERSE};
use crate::error::{Error, Result};

pub const TOLERANCE: f64 = 1e-9;

/// A concrete counterexample `(S, T, v)` with the two sides that were compared.
///
/// For monotonicity `element` is the node added to `base` to form `extended`,
/// `lhs = f(S)` and `rhs = f(T)`. For the submodularity variants `extended = S + u`
/// and `lhs`, `rhs` are the margins (or normalized margins) of `element` at `S`
/// and `T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Violation {
    pub base: u64,
    pub extended: u64,
    pub element: usize,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    pub domain: usize,
    pub monotone: Option<Violation>,
    pub submodular: Option<Violation>,
    /// `None` when the function leaves `[0, 1]` and the ratio is meaningless.
    pub normalized_submodular: Option<Option<Violation>>,
}

impl PropertyReport {
    pub fn is_monotone(&self) -> bool {
        self.monotone.is_none()
    }

    pub fn is_submodular(&self) -> bool {
        self.submodular.is_none()
    }

    pub fn is_normalized_submodular(&self) -> bool {
        matches!(self.normalized_submodular, Some(None))
    }

    pub fn all_hold(&self) -> bool {
        self.is_monotone() && self.is_submodular() && self.is_normalized_submodular()
    }
}

/// Normalized margin `(f(S + v) - f(S)) / (1 - f(S))`.
///
/// At `f(S) = 1` the ratio is taken to be 1 (the state is unreachable for an
/// inactive node); callers skip such pairs on the right-hand side.
pub fn normalized_margin(f_base: f64, f_up: f64) -> f64 {
    if f_base >= 1.0 - TOLERANCE {
        1.0
    } else {
        (f_up - f_base) / (1.0 - f_base)
    }
}

/// Exhaustively checks a set function on the domain `0..m`.
pub fn check_set_function(m: usize, f: impl Fn(u64) -> f64) -> Result<PropertyReport> {
    if m > MAX_TABLE_NEIGHBORS {
        return Err(Error::DomainTooLarge { size: m, limit: MAX_TABLE_NEIGHBORS });
    }
    let values: Vec<f64> = (0..1u64 << m).map(&f).collect();
    let unit = values.iter().all(|v| (0.0..=1.0).contains(v));

    let mut monotone = None;
    let mut submodular = None;
    let mut normalized = None;
    for s in 0..1u64 << m {
        for u in (0..m).filter(|u| s >> u & 1 == 0) {
            let su = s | 1 << u;
            if monotone.is_none() && values[su as usize] < values[s as usize] - TOLERANCE {
                monotone = Some(Violation {
                    base: s,
                    extended: su,
                    element: u,
                    lhs: values[s as usize],
                    rhs: values[su as usize],
                });
            }
            for v in (0..m).filter(|&v| v != u && s >> v & 1 == 0) {
                let sv = s | 1 << v;
                let suv = su | 1 << v;
                let (fs, fsu, fsv, fsuv) =
                    (values[s as usize], values[su as usize], values[sv as usize], values[suv as usize]);
                if v > u && submodular.is_none() {
                    let (lhs, rhs) = (fsv - fs, fsuv - fsu);
                    if lhs < rhs - TOLERANCE {
                        submodular = Some(Violation { base: s, extended: su, element: v, lhs, rhs });
                    }
                }
                if unit && normalized.is_none() && fsu < 1.0 - TOLERANCE {
                    let lhs = normalized_margin(fs, fsv);
                    let rhs = normalized_margin(fsu, fsuv);
                    if lhs < rhs - TOLERANCE {
                        normalized = Some(Violation { base: s, extended: su, element: v, lhs, rhs });
                    }
                }
            }
        }
    }
    Ok(PropertyReport { domain: m, monotone, submodular, normalized_submodular: unit.then_some(normalized) })
}

/// Checks an activation over its own neighbor list.
pub fn check_properties(f: &Activation) -> Result<PropertyReport> {
    check_set_function(f.neighbors().len(), |mask| f.eval_local(mask))
}

/// Checks a weight function over a universe of `n` nodes.
pub fn check_weight_properties(w: &WeightFunction, n: usize) -> Result<PropertyReport> {
    if n > MAX_TABLE_UNIVERSE {
        return Err(Error::DomainTooLarge { size: n, limit: MAX_TABLE_UNIVERSE });
    }
    check_set_function(n, |mask| w.eval_mask(mask))
}

/// Quadruple `(S, S', T, T')` with `S ⊆ S'`, `T ⊆ T'` and
/// `f(S ∪ T') - f(S) < f(S' ∪ T) - f(S')`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CrossMarginViolation {
    pub s: u64,
    pub s_sup: u64,
    pub t: u64,
    pub t_sup: u64,
}

/// Brute-force search for a violation of the cross-margin inequality
/// `f(S ∪ T') - f(S) >= f(S' ∪ T) - f(S')` over every `S ⊆ S'`, `T ⊆ T'`.
pub fn cross_margin_violation(m: usize, f: impl Fn(u64) -> f64) -> Option<CrossMarginViolation> {
    let full = (1u64 << m) - 1;
    let supersets = |x: u64| {
        let free = full & !x;
        // iterate submasks of `free` and add them to x
        let mut out = Vec::new();
        let mut sub = free;
        loop {
            out.push(x | sub);
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & free;
        }
        out
    };
    for s in 0..=full {
        for s_sup in supersets(s) {
            for t in 0..=full {
                for t_sup in supersets(t) {
                    let lhs = f(s | t_sup) - f(s);
                    let rhs = f(s_sup | t) - f(s_sup);
                    if lhs < rhs - TOLERANCE {
                        return Some(CrossMarginViolation { s, s_sup, t, t_sup });
                    }
                }
            }
        }
    }
    None
}

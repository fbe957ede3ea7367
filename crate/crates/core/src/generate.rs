//! Random test networks.
//!
//! Table generators return values indexed by bitmask over `k` ground elements,
//! with `f(∅) = 0` and all values in `[0, 1]`.

use rand::seq::index::sample;
use rand::Rng;

use crate::error::Result;
use crate::network::{Activation, SocialNetwork, WeightFunction};

/// Family of activation tables to draw from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableKind {
    /// Monotone and submodular.
    Submodular,
    /// Monotone with ratio margins `(f(S+i) - f(S)) / (1 - f(S))` decreasing in `S`.
    NormalizedSubmodular,
    /// Monotone only; usually neither of the above.
    Monotone,
}

/// Weighted coverage: element `i` covers a random subset of `items` items.
fn coverage<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    let items = rng.gen_range(1..=6usize);
    let weight: Vec<f64> = (0..items).map(|_| rng.gen::<f64>() + 0.05).collect();
    let covers: Vec<u32> = (0..k).map(|_| rng.gen_range(0..1u32 << items)).collect();
    (0..1usize << k)
        .map(|mask| {
            let covered = (0..k).filter(|i| mask >> i & 1 == 1).fold(0u32, |c, i| c | covers[i]);
            (0..items).filter(|j| covered >> j & 1 == 1).map(|j| weight[j]).sum()
        })
        .collect()
}

/// `g(Σ a_i)` for a random concave `g`.
fn concave_of_modular<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    let a: Vec<f64> = (0..k).map(|_| rng.gen::<f64>()).collect();
    let shape = rng.gen_range(0..3);
    (0..1usize << k)
        .map(|mask| {
            let x: f64 = (0..k).filter(|i| mask >> i & 1 == 1).map(|i| a[i]).sum();
            match shape {
                0 => x.min(1.0),
                1 => 1.0 - (-2.0 * x).exp(),
                _ => x.sqrt(),
            }
        })
        .collect()
}

/// A monotone submodular table on `k` elements with values in `[0, 1]`.
pub fn submodular_table<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    let parts = [coverage(k, rng), concave_of_modular(k, rng)];
    let mix: f64 = rng.gen();
    let mut values: Vec<f64> = (0..1usize << k).map(|m| mix * parts[0][m] + (1.0 - mix) * parts[1][m]).collect();
    let top = values.iter().cloned().fold(0.0f64, f64::max);
    // sometimes saturate at 1, sometimes stay well below
    let scale = if top > 0.0 { rng.gen_range(0.3..=1.0) / top } else { 0.0 };
    for v in &mut values {
        *v = (*v * scale).clamp(0.0, 1.0);
    }
    values[0] = 0.0;
    values
}

/// `1 - exp(-h)` for a monotone submodular `h`; the ratio margins of such a
/// table decrease.
pub fn normalized_submodular_table<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    let h = coverage(k, rng);
    let scale = rng.gen_range(0.2..3.0);
    (0..1usize << k).map(|m| if m == 0 { 0.0 } else { 1.0 - (-scale * h[m]).exp() }).collect()
}

/// A monotone table built by adding random increments along the subset lattice.
pub fn monotone_table<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    let mut values = vec![0.0f64; 1 << k];
    let mut order: Vec<usize> = (1..1usize << k).collect();
    order.sort_by_key(|m| m.count_ones());
    for m in order {
        let floor = (0..k).filter(|i| m >> i & 1 == 1).map(|i| values[m & !(1 << i)]).fold(0.0, f64::max);
        let jump = if rng.gen_bool(0.3) { 0.0 } else { rng.gen::<f64>() };
        values[m] = floor + jump;
    }
    let top = values.iter().cloned().fold(0.0f64, f64::max);
    if top > 0.0 {
        for v in &mut values {
            *v /= top;
        }
    }
    values
}

pub fn table<R: Rng + ?Sized>(kind: TableKind, k: usize, rng: &mut R) -> Vec<f64> {
    match kind {
        TableKind::Submodular => submodular_table(k, rng),
        TableKind::NormalizedSubmodular => normalized_submodular_table(k, rng),
        TableKind::Monotone => monotone_table(k, rng),
    }
}

/// A network on `n` nodes where every node has a table activation over up to
/// `max_degree` random other nodes.
pub fn random_network<R: Rng + ?Sized>(
    n: usize,
    max_degree: usize,
    kind: TableKind,
    rng: &mut R,
) -> Result<SocialNetwork> {
    let activations = (0..n)
        .map(|v| {
            let cap = max_degree.min(n.saturating_sub(1));
            let degree = rng.gen_range(0..=cap);
            let mut neighbors: Vec<usize> =
                sample(rng, n - 1, degree).into_iter().map(|i| if i >= v { i + 1 } else { i }).collect();
            neighbors.sort_unstable();
            let values = table(kind, degree, rng);
            Activation::Table { neighbors, values }
        })
        .collect();
    let labels = (0..n).map(|i| format!("n{i}")).collect();
    SocialNetwork::new(labels, activations, WeightFunction::Cardinality)
}

/// A network of linear activations with random nonnegative weights summing to at most 1.
pub fn random_linear_network<R: Rng + ?Sized>(n: usize, max_degree: usize, rng: &mut R) -> Result<SocialNetwork> {
    let activations = (0..n)
        .map(|v| {
            let degree = rng.gen_range(0..=max_degree.min(n.saturating_sub(1)));
            let mut neighbors: Vec<usize> =
                sample(rng, n - 1, degree).into_iter().map(|i| if i >= v { i + 1 } else { i }).collect();
            neighbors.sort_unstable();
            let raw: Vec<f64> = (0..degree).map(|_| rng.gen::<f64>()).collect();
            let total: f64 = raw.iter().sum::<f64>() / rng.gen_range(0.3..=1.0);
            let weights = raw.iter().map(|w| if total > 0.0 { w / total } else { 0.0 }).collect();
            Activation::Linear { neighbors, weights }
        })
        .collect();
    let labels = (0..n).map(|i| format!("n{i}")).collect();
    SocialNetwork::new(labels, activations, WeightFunction::Cardinality)
}

/// A monotone submodular weight table on `n` nodes, scaled to range up to `n`.
pub fn random_weight<R: Rng + ?Sized>(n: usize, rng: &mut R) -> WeightFunction {
    let base = submodular_table(n, rng);
    let scale = n as f64;
    WeightFunction::Table(base.into_iter().map(|x| x * scale).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::check_set_function;
    use crate::rng::replicate_rng;

    #[test]
    fn generated_tables_have_their_properties() {
        let mut rng = replicate_rng(17, 0);
        for k in 0..=5 {
            for _ in 0..40 {
                let f = submodular_table(k, &mut rng);
                let r = check_set_function(k, |m| f[m as usize]).unwrap();
                assert!(r.is_monotone() && r.is_submodular(), "{f:?}");
                assert!(f.iter().all(|x| (0.0..=1.0).contains(x)) && f[0] == 0.0);

                let g = normalized_submodular_table(k, &mut rng);
                let r = check_set_function(k, |m| g[m as usize]).unwrap();
                assert!(r.all_hold(), "{g:?}");

                let h = monotone_table(k, &mut rng);
                assert!(check_set_function(k, |m| h[m as usize]).unwrap().is_monotone());
            }
        }
    }

    #[test]
    fn networks_validate() {
        let mut rng = replicate_rng(3, 0);
        for kind in [TableKind::Submodular, TableKind::NormalizedSubmodular, TableKind::Monotone] {
            let net = random_network(6, 3, kind, &mut rng).unwrap();
            assert_eq!(net.n(), 6);
        }
        assert_eq!(random_network(1, 3, TableKind::Submodular, &mut rng).unwrap().n(), 1);
        assert_eq!(random_linear_network(5, 4, &mut rng).unwrap().n(), 5);
        assert!(random_weight(4, &mut rng).validate(4).is_ok());
    }
}

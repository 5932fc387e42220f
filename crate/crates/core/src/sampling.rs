//! Negative sampling by head/tail corruption.
//!
//! Corrupted triples keep their relation and differ from the source in
//! exactly one slot; the replacement entity is drawn uniformly from all
//! entities except the one it replaces. Sampled negatives are deliberately
//! not filtered against the known-true set: false negatives are part of the
//! training signal the soft-margin and adaptive losses are designed around.

use rand::Rng;

use crate::data::Triple;
use crate::error::{Error, Result};

/// Negative sampling scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SamplerKind {
    /// Corrupt head or tail with probability 1/2 each.
    #[default]
    Uniform,
    /// Corrupt the head with per-relation probability `tph/(tph+hpt)`.
    Bernoulli,
}

impl SamplerKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SamplerKind::Uniform => "unif",
            SamplerKind::Bernoulli => "bern",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "unif" => Ok(SamplerKind::Uniform),
            "bern" => Ok(SamplerKind::Bernoulli),
            other => Err(Error::Config(format!("unknown sampler {other:?} (expected unif|bern)"))),
        }
    }
}

/// Per-relation corruption statistics for the Bernoulli scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct RelationStats {
    /// Mean distinct tails per distinct head.
    pub tph: f64,
    /// Mean distinct heads per distinct tail.
    pub hpt: f64,
    /// Probability of corrupting the head: `tph / (tph + hpt)`.
    pub p_head: f64,
}

/// Bernoulli statistics indexed by relation. Relations absent from the
/// training split have no entry and fall back to uniform corruption.
#[derive(Debug, Clone, PartialEq)]
pub struct BernStats {
    per_relation: Vec<Option<RelationStats>>,
}

impl BernStats {
    pub fn relation(&self, r: usize) -> Option<&RelationStats> {
        self.per_relation.get(r).and_then(|s| s.as_ref())
    }
}

/// Compute tph/hpt over the distinct (head, tail) pairs of each relation.
pub fn compute_bern_stats(train: &[Triple], n_relations: usize) -> BernStats {
    use std::collections::HashSet;
    let mut pairs: Vec<HashSet<(usize, usize)>> = vec![HashSet::new(); n_relations];
    for t in train {
        pairs[t.relation].insert((t.head, t.tail));
    }
    let per_relation = pairs
        .into_iter()
        .map(|set| {
            if set.is_empty() {
                return None;
            }
            let n_pairs = set.len() as f64;
            let heads: HashSet<usize> = set.iter().map(|&(h, _)| h).collect();
            let tails: HashSet<usize> = set.iter().map(|&(_, t)| t).collect();
            let tph = n_pairs / heads.len() as f64;
            let hpt = n_pairs / tails.len() as f64;
            Some(RelationStats { tph, hpt, p_head: tph / (tph + hpt) })
        })
        .collect();
    BernStats { per_relation }
}

/// Uniform replacement excluding the original entity.
fn replace_entity(original: usize, n_entities: usize, rng: &mut impl Rng) -> usize {
    debug_assert!(n_entities >= 2);
    let e = rng.random_range(0..n_entities - 1);
    if e >= original {
        e + 1
    } else {
        e
    }
}

fn corrupt(t: Triple, p_head: f64, n_entities: usize, rng: &mut impl Rng) -> Triple {
    if rng.random::<f64>() < p_head {
        Triple::new(replace_entity(t.head, n_entities, rng), t.relation, t.tail)
    } else {
        Triple::new(t.head, t.relation, replace_entity(t.tail, n_entities, rng))
    }
}

/// Corrupt head or tail with equal probability.
pub fn corrupt_uniform(t: Triple, n_entities: usize, rng: &mut impl Rng) -> Triple {
    corrupt(t, 0.5, n_entities, rng)
}

/// Corrupt the head with the relation's `p_head`, the tail otherwise.
/// Relations without statistics corrupt uniformly.
pub fn corrupt_bern(t: Triple, stats: &BernStats, n_entities: usize, rng: &mut impl Rng) -> Triple {
    let p_head = stats.relation(t.relation).map_or(0.5, |s| s.p_head);
    corrupt(t, p_head, n_entities, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn two_entity_corruption_has_one_alternative() {
        let mut r = rng(0);
        for _ in 0..50 {
            let c = corrupt_uniform(Triple::new(0, 0, 1), 2, &mut r);
            assert!(c == Triple::new(1, 0, 1) || c == Triple::new(0, 0, 0));
        }
    }

    #[test]
    fn corruption_changes_exactly_one_slot() {
        let mut r = rng(1);
        let t = Triple::new(3, 2, 7);
        for _ in 0..1000 {
            let c = corrupt_uniform(t, 10, &mut r);
            assert_eq!(c.relation, t.relation);
            let head_changed = c.head != t.head;
            let tail_changed = c.tail != t.tail;
            assert!(head_changed ^ tail_changed);
        }
    }

    #[test]
    fn uniform_side_choice_is_balanced() {
        let mut r = rng(2);
        let t = Triple::new(3, 0, 7);
        let n = 100_000;
        let heads = (0..n)
            .filter(|_| corrupt_uniform(t, 10, &mut r).head != t.head)
            .count();
        let freq = heads as f64 / n as f64;
        assert_abs_diff_eq!(freq, 0.5, epsilon = 0.01);
    }

    #[test]
    fn one_to_one_relation_is_balanced() {
        let stats = compute_bern_stats(&[Triple::new(0, 0, 1)], 1);
        let s = stats.relation(0).unwrap();
        assert_eq!(s.tph, 1.0);
        assert_eq!(s.hpt, 1.0);
        assert_eq!(s.p_head, 0.5);
    }

    #[test]
    fn one_to_many_relation_prefers_head_corruption() {
        // {(a,r,b), (a,r,c)}: one head, two tails
        let stats = compute_bern_stats(&[Triple::new(0, 0, 1), Triple::new(0, 0, 2)], 1);
        let s = stats.relation(0).unwrap();
        assert_eq!(s.tph, 2.0);
        assert_eq!(s.hpt, 1.0);
        assert_abs_diff_eq!(s.p_head, 2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn many_to_one_relation_prefers_tail_corruption() {
        // {(a,r,c), (b,r,c)}: two heads, one tail
        let stats = compute_bern_stats(&[Triple::new(0, 0, 2), Triple::new(1, 0, 2)], 1);
        let s = stats.relation(0).unwrap();
        assert_eq!(s.tph, 1.0);
        assert_eq!(s.hpt, 2.0);
        assert_abs_diff_eq!(s.p_head, 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn duplicate_triples_do_not_skew_stats() {
        let t = Triple::new(0, 0, 1);
        let stats = compute_bern_stats(&[t, t, t], 1);
        assert_eq!(stats.relation(0).unwrap().p_head, 0.5);
    }

    #[test]
    fn forced_probabilities_pin_the_side() {
        let forced = |p: f64| BernStats {
            per_relation: vec![Some(RelationStats { tph: 1.0, hpt: 1.0, p_head: p })],
        };
        let t = Triple::new(3, 0, 7);
        let mut r = rng(3);
        for _ in 0..200 {
            let c = corrupt_bern(t, &forced(1.0), 10, &mut r);
            assert_ne!(c.head, t.head);
            let c = corrupt_bern(t, &forced(0.0), 10, &mut r);
            assert_ne!(c.tail, t.tail);
        }
    }

    #[test]
    fn bern_empirical_frequency_matches_p_head() {
        let train = [Triple::new(0, 0, 1), Triple::new(0, 0, 2)];
        let stats = compute_bern_stats(&train, 1);
        let mut r = rng(4);
        let t = Triple::new(0, 0, 1);
        let n = 100_000;
        let heads = (0..n)
            .filter(|_| corrupt_bern(t, &stats, 10, &mut r).head != t.head)
            .count();
        let freq = heads as f64 / n as f64;
        assert_abs_diff_eq!(freq, 2.0 / 3.0, epsilon = 0.01);
    }

    #[test]
    fn unseen_relation_falls_back_to_uniform() {
        let stats = compute_bern_stats(&[Triple::new(0, 0, 1)], 3);
        assert!(stats.relation(2).is_none());
        let mut r = rng(5);
        let t = Triple::new(3, 2, 7);
        let n = 100_000;
        let heads = (0..n)
            .filter(|_| corrupt_bern(t, &stats, 10, &mut r).head != t.head)
            .count();
        assert_abs_diff_eq!(heads as f64 / n as f64, 0.5, epsilon = 0.01);
    }

    #[test]
    fn replacement_never_equals_original() {
        let mut r = rng(6);
        for original in 0..5 {
            for _ in 0..1000 {
                assert_ne!(replace_entity(original, 5, &mut r), original);
            }
        }
    }

    #[test]
    fn fixed_seed_reproduces_the_stream() {
        let t = Triple::new(3, 0, 7);
        let a: Vec<Triple> = {
            let mut r = rng(9);
            (0..100).map(|_| corrupt_uniform(t, 10, &mut r)).collect()
        };
        let b: Vec<Triple> = {
            let mut r = rng(9);
            (0..100).map(|_| corrupt_uniform(t, 10, &mut r)).collect()
        };
        assert_eq!(a, b);
    }
}

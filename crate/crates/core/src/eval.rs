//! Link-prediction evaluation: left/right ranks, Mean Rank, Hits@K.
//!
//! For a test triple, every entity is substituted into the head slot (left)
//! and the tail slot (right); candidates are ranked by ascending score. The
//! rank of the true triple counts only candidates with strictly smaller
//! score, plus one — deterministic under ties and independent of candidate
//! order. Filtered mode additionally drops candidates (other than the true
//! triple) that are known true in any split.

use rayon::prelude::*;

use crate::data::{Dataset, Triple, Vocabulary};
use crate::scoring::{score, EmbeddingState, Norm};

/// 1-based left/right ranks of one triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankResult {
    /// Rank over head-replacement candidates.
    pub r_left: usize,
    /// Rank over tail-replacement candidates.
    pub r_right: usize,
}

impl RankResult {
    pub fn mean_rank(&self) -> f64 {
        (self.r_left + self.r_right) as f64 / 2.0
    }
}

/// Raw and filtered ranks of one evaluated triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TripleRanks {
    pub triple: Triple,
    pub raw: RankResult,
    pub filtered: RankResult,
}

/// Aggregated link-prediction metrics with per-triple detail.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub k: usize,
    pub mean_rank_raw: f64,
    pub mean_rank_filtered: f64,
    /// Percentage of rank observations (two per triple) at or below `k`.
    pub hits_at_k_raw: f64,
    pub hits_at_k_filtered: f64,
    pub per_triple: Vec<TripleRanks>,
}

fn rank_both_sides(state: &EmbeddingState, t: Triple, dataset: &Dataset, norm: Norm) -> (RankResult, RankResult) {
    let true_score = score(state, t, norm);
    let mut raw = [1usize; 2];
    let mut filtered = [1usize; 2];
    for (side, slot_of) in [
        (0, &(|e: usize| Triple::new(e, t.relation, t.tail)) as &dyn Fn(usize) -> Triple),
        (1, &(|e: usize| Triple::new(t.head, t.relation, e))),
    ] {
        let own = if side == 0 { t.head } else { t.tail };
        for e in 0..state.n_entities {
            if e == own {
                continue;
            }
            let candidate = slot_of(e);
            let s = score(state, candidate, norm);
            if s < true_score {
                raw[side] += 1;
                if !dataset.is_true(candidate) {
                    filtered[side] += 1;
                }
            }
        }
    }
    (
        RankResult { r_left: raw[0], r_right: raw[1] },
        RankResult { r_left: filtered[0], r_right: filtered[1] },
    )
}

/// Rank one triple against all head/tail replacements.
pub fn rank_triple(state: &EmbeddingState, t: Triple, dataset: &Dataset, norm: Norm, filtered: bool) -> RankResult {
    let (raw, filt) = rank_both_sides(state, t, dataset, norm);
    if filtered {
        filt
    } else {
        raw
    }
}

/// Aggregate per-triple ranks into MR and Hits@K (percent), raw and filtered.
fn aggregate(per_triple: &[TripleRanks], k: usize) -> (f64, f64, f64, f64) {
    let n = per_triple.len() as f64;
    let mr = |pick: &dyn Fn(&TripleRanks) -> RankResult| {
        per_triple.iter().map(|t| pick(t).mean_rank()).sum::<f64>() / n
    };
    let hits = |pick: &dyn Fn(&TripleRanks) -> RankResult| {
        let hit = per_triple
            .iter()
            .flat_map(|t| [pick(t).r_left, pick(t).r_right])
            .filter(|&r| r <= k)
            .count();
        100.0 * hit as f64 / (2.0 * n)
    };
    (mr(&|t| t.raw), mr(&|t| t.filtered), hits(&|t| t.raw), hits(&|t| t.filtered))
}

/// Evaluate a triple list, computing raw and filtered metrics in one pass.
/// Panics on an empty triple list.
pub fn evaluate(state: &EmbeddingState, triples: &[Triple], dataset: &Dataset, norm: Norm, k: usize) -> EvalReport {
    assert!(!triples.is_empty(), "evaluate needs at least one triple");
    let per_triple: Vec<TripleRanks> = triples
        .par_iter()
        .map(|&t| {
            let (raw, filtered) = rank_both_sides(state, t, dataset, norm);
            TripleRanks { triple: t, raw, filtered }
        })
        .collect();
    let (mean_rank_raw, mean_rank_filtered, hits_at_k_raw, hits_at_k_filtered) = aggregate(&per_triple, k);
    EvalReport {
        k,
        mean_rank_raw,
        mean_rank_filtered,
        hits_at_k_raw,
        hits_at_k_filtered,
        per_triple,
    }
}

impl EvalReport {
    /// Flat `key<TAB>value` record with a fixed field order.
    pub fn flat_record(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("k\t{}\n", self.k));
        s.push_str(&format!("n_triples\t{}\n", self.per_triple.len()));
        s.push_str(&format!("mean_rank_raw\t{:.6}\n", self.mean_rank_raw));
        s.push_str(&format!("mean_rank_filtered\t{:.6}\n", self.mean_rank_filtered));
        s.push_str(&format!("hits_at_{}_raw\t{:.6}\n", self.k, self.hits_at_k_raw));
        s.push_str(&format!("hits_at_{}_filtered\t{:.6}\n", self.k, self.hits_at_k_filtered));
        s
    }

    /// Per-triple detail as TSV: labels, raw ranks, filtered ranks.
    pub fn per_triple_tsv(&self, vocab: &Vocabulary) -> String {
        let mut s = String::from("head\trelation\ttail\traw_left\traw_right\tfiltered_left\tfiltered_right\n");
        for tr in &self.per_triple {
            s.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                vocab.entity_label(tr.triple.head),
                vocab.relation_label(tr.triple.relation),
                vocab.entity_label(tr.triple.tail),
                tr.raw.r_left,
                tr.raw.r_right,
                tr.filtered.r_left,
                tr.filtered.r_right,
            ));
        }
        s
    }

    pub fn summary(&self) -> String {
        format!(
            "MR raw {:.2} | MR filtered {:.2} | Hits@{} raw {:.2}% | Hits@{} filtered {:.2}%",
            self.mean_rank_raw, self.mean_rank_filtered, self.k, self.hits_at_k_raw, self.k, self.hits_at_k_filtered
        )
    }
}

//! Translation scoring `f_r(h,t) = ‖h + r − t‖` and its exact gradients.
//!
//! The gradient carrier only stores the head direction: for the translation
//! form, the relation derivative equals the head derivative and the tail
//! derivative is its negation, identically.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::Triple;
use crate::error::{Error, Result};
use crate::loss::{LossKind, LossSpec};

/// Dissimilarity norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Norm {
    /// Sum of absolute residuals. The classic choice for these benchmarks.
    #[default]
    L1,
    /// Euclidean residual length.
    L2,
}

impl Norm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Norm::L1 => "l1",
            Norm::L2 => "l2",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(Norm::L1),
            "l2" => Ok(Norm::L2),
            other => Err(Error::Config(format!("unknown norm {other:?} (expected l1|l2)"))),
        }
    }
}

/// Entity and relation embedding matrices plus the learned slack.
///
/// Matrices are dense row-major `f64`. `per_triple_slack` is present exactly
/// when training with the soft margin loss; every other loss uses the shared
/// scalar `slack` (and MRL/RS simply never update it).
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingState {
    pub entities: Vec<f64>,
    pub relations: Vec<f64>,
    pub n_entities: usize,
    pub n_relations: usize,
    pub dim: usize,
    pub slack: f64,
    pub per_triple_slack: Option<Vec<f64>>,
}

impl EmbeddingState {
    /// Random initialization: entries uniform in `[-6/√d, +6/√d]`, entity
    /// rows rescaled to unit L2 norm, slack chosen by the loss kind
    /// (0 for expansion, M for contraction, 0.1 otherwise). Deterministic
    /// under a fixed seed.
    pub fn init(
        n_entities: usize,
        n_relations: usize,
        dim: usize,
        seed: u64,
        loss: &LossSpec,
        train_len: usize,
    ) -> Self {
        assert!(n_entities >= 1 && n_relations >= 1 && dim >= 1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bound = 6.0 / (dim as f64).sqrt();
        let mut draw = |n: usize| -> Vec<f64> {
            (0..n).map(|_| rng.random_range(-bound..=bound)).collect()
        };
        let mut entities = draw(n_entities * dim);
        let relations = draw(n_relations * dim);
        for row in entities.chunks_mut(dim) {
            let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                row.iter_mut().for_each(|x| *x /= norm);
            }
        }
        let slack = match loss.kind {
            LossKind::AmlExpansion => 0.0,
            LossKind::AmlContraction => loss.m,
            _ => 0.1,
        };
        let per_triple_slack = loss.kind.per_triple_slack().then(|| vec![0.0; train_len]);
        EmbeddingState {
            entities,
            relations,
            n_entities,
            n_relations,
            dim,
            slack,
            per_triple_slack,
        }
    }

    #[inline]
    pub fn entity(&self, i: usize) -> &[f64] {
        &self.entities[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn relation(&self, i: usize) -> &[f64] {
        &self.relations[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn entity_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.entities[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn relation_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.relations[i * self.dim..(i + 1) * self.dim]
    }

    fn residual(&self, t: Triple) -> impl Iterator<Item = f64> + '_ {
        let h = self.entity(t.head);
        let r = self.relation(t.relation);
        let tl = self.entity(t.tail);
        (0..self.dim).map(move |i| h[i] + r[i] - tl[i])
    }
}

/// Partial derivatives of the score with respect to the three embedding rows.
/// `d_relation = d_head` and `d_tail = -d_head` hold by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreGrad {
    pub d_head: Vec<f64>,
}

impl ScoreGrad {
    pub fn d_relation(&self) -> &[f64] {
        &self.d_head
    }

    pub fn d_tail(&self) -> Vec<f64> {
        self.d_head.iter().map(|x| -x).collect()
    }
}

/// `‖h + r − t‖` under the chosen norm. Always nonnegative.
pub fn score(state: &EmbeddingState, t: Triple, norm: Norm) -> f64 {
    match norm {
        Norm::L1 => state.residual(t).map(f64::abs).sum(),
        Norm::L2 => state.residual(t).map(|x| x * x).sum::<f64>().sqrt(),
    }
}

/// Score plus its gradient. At nondifferentiable points (L1 kinks, L2 zero
/// residual) the zero subgradient is used.
pub fn score_grad(state: &EmbeddingState, t: Triple, norm: Norm) -> (f64, ScoreGrad) {
    let residual: Vec<f64> = state.residual(t).collect();
    match norm {
        Norm::L1 => {
            let value = residual.iter().map(|x| x.abs()).sum();
            let d_head = residual
                .iter()
                .map(|&x| {
                    if x > 0.0 {
                        1.0
                    } else if x < 0.0 {
                        -1.0
                    } else {
                        0.0
                    }
                })
                .collect();
            (value, ScoreGrad { d_head })
        }
        Norm::L2 => {
            let value = residual.iter().map(|x| x * x).sum::<f64>().sqrt();
            let d_head = if value > 0.0 {
                residual.iter().map(|x| x / value).collect()
            } else {
                vec![0.0; residual.len()]
            };
            (value, ScoreGrad { d_head })
        }
    }
}

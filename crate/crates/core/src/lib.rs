//! Translation-based knowledge graph embeddings with margin losses.
//!
//! The toolkit trains a TransE scorer (`‖h + r − t‖` under L1 or L2) with a
//! choice of five losses: margin ranking, limit-based ranking, soft margin,
//! and the adaptive margin pair that learns its own margin width through a
//! slack variable — contraction (quadratic slack penalty, margin shrinks)
//! and expansion (Gaussian-kernel penalty, margin widens). Link prediction
//! is evaluated with raw and filtered Mean Rank and Hits@K.

pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod data;
pub mod error;
pub mod eval;
pub mod loss;
pub mod optim;
pub mod sampling;
pub mod scoring;
pub mod synthetic;
pub mod train;

pub use data::{build_dataset, load_dataset, load_triples, Dataset, RawTriple, Triple, TripleFormat, Vocabulary};
pub use error::{Error, ErrorCategory, Result};
pub use eval::{evaluate, rank_triple, EvalReport, RankResult};
pub use loss::{batch_loss, hinge, margin_bounds, LossKind, LossOut, LossSpec};
pub use optim::{normalize_entities, Optimizer, OptimizerKind};
pub use sampling::{compute_bern_stats, corrupt_bern, corrupt_uniform, BernStats, SamplerKind};
pub use scoring::{score, score_grad, EmbeddingState, Norm, ScoreGrad};
pub use synthetic::{generate, GeneratorKind, SyntheticSpec};
pub use train::{train, train_with, TrainConfig, TrainLog, TrainRecord};

//! Mini-batch training with early stopping on validation Hits@10.
//!
//! Per batch: sample negatives, score both sides, evaluate the configured
//! loss, chain its derivatives through the score gradients into the touched
//! embedding rows and the slack, and apply one optimizer step. Row gradients
//! are accumulated in index order before the update, so a fixed seed yields a
//! bit-identical run.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::eval::evaluate;
use crate::loss::{LossKind, LossSpec};
use crate::optim::{normalize_entities, Gradient, Optimizer, OptimizerKind, Param};
use crate::sampling::{compute_bern_stats, corrupt_bern, corrupt_uniform, SamplerKind};
use crate::scoring::{score_grad, EmbeddingState, Norm};

/// Validation metric: Hits@10, matching the headline benchmark metric.
const VALID_K: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub loss: LossSpec,
    pub norm: Norm,
    pub dim: usize,
    pub batch_size: usize,
    pub max_iterations: usize,
    pub optimizer: OptimizerKind,
    pub learning_rate: f64,
    pub sampler: SamplerKind,
    pub negatives_per_positive: usize,
    pub normalize_entities: bool,
    pub eval_every: usize,
    pub patience: usize,
    pub seed: u64,
    /// Overrides the loss kind's slack initialization when set.
    pub xi_init: Option<f64>,
}

impl TrainConfig {
    /// Reference defaults: d=100, lr=0.1, Adagrad, batch 1024, uniform
    /// sampling, L1 norm. `max_iterations` defaults to a desk-scale 1000;
    /// benchmark-scale runs set it explicitly.
    pub fn new(loss: LossSpec) -> Self {
        TrainConfig {
            loss,
            norm: Norm::L1,
            dim: 100,
            batch_size: 1024,
            max_iterations: 1000,
            optimizer: OptimizerKind::Adagrad,
            learning_rate: 0.1,
            sampler: SamplerKind::Uniform,
            negatives_per_positive: 1,
            normalize_entities: true,
            eval_every: 1000,
            patience: 10,
            seed: 0,
            xi_init: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 1 {
            return Err(Error::Config("dim must be >= 1".to_owned()));
        }
        if self.batch_size < 1 {
            return Err(Error::Config("batch size must be >= 1".to_owned()));
        }
        if self.max_iterations < 1 {
            return Err(Error::Config("max_iterations must be >= 1".to_owned()));
        }
        if self.negatives_per_positive < 1 {
            return Err(Error::Config("negatives per positive must be >= 1".to_owned()));
        }
        if self.eval_every < 1 {
            return Err(Error::Config("eval_every must be >= 1".to_owned()));
        }
        if self.patience < 1 {
            return Err(Error::Config("patience must be >= 1".to_owned()));
        }
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(Error::Config(format!("learning rate must be > 0, got {}", self.learning_rate)));
        }
        if let Some(x) = self.xi_init {
            if !x.is_finite() {
                return Err(Error::Config(format!("xi_init must be finite, got {x}")));
            }
        }
        self.loss.validate()
    }

    /// Serialize as flat `key = value` text with a fixed key order.
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| s.push_str(&format!("{k} = {v}\n"));
        kv("loss", self.loss.kind.as_str().to_owned());
        kv("gamma", self.loss.gamma.to_string());
        kv("gamma1", self.loss.gamma1.to_string());
        kv("gamma2", self.loss.gamma2.to_string());
        kv("lambda", self.loss.lambda.to_string());
        kv("lambda_pos", self.loss.lambda_pos.to_string());
        kv("lambda_neg", self.loss.lambda_neg.to_string());
        kv("sigma", self.loss.sigma.to_string());
        kv("m", self.loss.m.to_string());
        kv("norm", self.norm.as_str().to_owned());
        kv("dim", self.dim.to_string());
        kv("batch", self.batch_size.to_string());
        kv("max_iter", self.max_iterations.to_string());
        kv("optimizer", self.optimizer.as_str().to_owned());
        kv("lr", self.learning_rate.to_string());
        kv("sampler", self.sampler.as_str().to_owned());
        kv("negatives", self.negatives_per_positive.to_string());
        kv("normalize", self.normalize_entities.to_string());
        kv("eval_every", self.eval_every.to_string());
        kv("patience", self.patience.to_string());
        kv("seed", self.seed.to_string());
        if let Some(x) = self.xi_init {
            kv("xi_init", x.to_string());
        }
        s
    }

    /// Parse the exact format written by [`TrainConfig::to_kv`]. Every key
    /// except `xi_init` is required.
    pub fn from_kv(text: &str) -> Result<Self> {
        let map = crate::config::parse_flat_kv(text)?;
        let get = |key: &str| -> Result<&str> {
            map.iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.as_str())
                .ok_or_else(|| Error::Config(format!("missing key {key}")))
        };
        let num = |key: &str| -> Result<f64> {
            get(key)?
                .parse()
                .map_err(|_| Error::Config(format!("key {key}: not a number: {:?}", get(key).unwrap())))
        };
        let int = |key: &str| -> Result<usize> {
            get(key)?
                .parse()
                .map_err(|_| Error::Config(format!("key {key}: not an integer: {:?}", get(key).unwrap())))
        };
        let loss = LossSpec {
            kind: LossKind::parse(get("loss")?)?,
            gamma: num("gamma")?,
            gamma1: num("gamma1")?,
            gamma2: num("gamma2")?,
            lambda: num("lambda")?,
            lambda_pos: num("lambda_pos")?,
            lambda_neg: num("lambda_neg")?,
            sigma: num("sigma")?,
            m: num("m")?,
        };
        let xi_init = match map.iter().find(|(k, _)| k == "xi_init") {
            Some((_, v)) => Some(
                v.parse::<f64>()
                    .map_err(|_| Error::Config(format!("key xi_init: not a number: {v:?}")))?,
            ),
            None => None,
        };
        Ok(TrainConfig {
            loss,
            norm: Norm::parse(get("norm")?)?,
            dim: int("dim")?,
            batch_size: int("batch")?,
            max_iterations: int("max_iter")?,
            optimizer: OptimizerKind::parse(get("optimizer")?)?,
            learning_rate: num("lr")?,
            sampler: SamplerKind::parse(get("sampler")?)?,
            negatives_per_positive: int("negatives")?,
            normalize_entities: get("normalize")? == "true",
            eval_every: int("eval_every")?,
            patience: int("patience")?,
            seed: int("seed")? as u64,
            xi_init,
        })
    }
}

/// One evaluation checkpoint of a training run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainRecord {
    pub iteration: usize,
    /// Mean per-pair loss since the previous record.
    pub mean_loss: f64,
    pub xi: f64,
    /// `2 * |xi|`.
    pub margin_width: f64,
    /// Filtered validation mean rank (NaN without a validation split).
    pub valid_mr: f64,
    /// Filtered validation Hits@10 (NaN without a validation split).
    pub valid_hits: f64,
}

impl TrainRecord {
    pub fn header() -> &'static str {
        "iteration\tmean_loss\txi\tmargin_width\tvalid_mr_filtered\tvalid_hits10_filtered"
    }

    pub fn line(&self) -> String {
        format!(
            "{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}",
            self.iteration, self.mean_loss, self.xi, self.margin_width, self.valid_mr, self.valid_hits
        )
    }
}

/// Records in iteration order, one per evaluation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainLog {
    pub records: Vec<TrainRecord>,
}

impl TrainLog {
    pub fn best_valid_hits(&self) -> Option<f64> {
        self.records.iter().map(|r| r.valid_hits).filter(|h| !h.is_nan()).fold(None, |best, h| {
            Some(match best {
                Some(b) if b >= h => b,
                _ => h,
            })
        })
    }

    pub fn to_lines(&self) -> String {
        let mut s = String::from(TrainRecord::header());
        s.push('\n');
        for r in &self.records {
            s.push_str(&r.line());
            s.push('\n');
        }
        s
    }
}

/// Train on `dataset.train`, validating on `dataset.valid` every
/// `eval_every` iterations. Returns the best-validation state (the final
/// state when there is no validation split) and the log.
pub fn train(dataset: &Dataset, config: &TrainConfig) -> Result<(EmbeddingState, TrainLog)> {
    train_with(dataset, config, |_| {})
}

/// [`train`] with a callback invoked as each record is produced, for
/// streaming logs to disk while training runs.
pub fn train_with(
    dataset: &Dataset,
    config: &TrainConfig,
    mut on_record: impl FnMut(&TrainRecord),
) -> Result<(EmbeddingState, TrainLog)> {
    config.validate()?;
    if dataset.train.is_empty() {
        return Err(Error::Data("cannot train on an empty training split".to_owned()));
    }
    let spec = &config.loss;
    let n_entities = dataset.num_entities();
    let mut state = EmbeddingState::init(
        n_entities,
        dataset.num_relations(),
        config.dim,
        config.seed,
        spec,
        dataset.train.len(),
    );
    if let Some(x0) = config.xi_init {
        state.slack = x0;
    }
    let bern = match config.sampler {
        SamplerKind::Bernoulli => Some(compute_bern_stats(&dataset.train, dataset.num_relations())),
        SamplerKind::Uniform => None,
    };
    let mut opt = Optimizer::new(config.optimizer, config.learning_rate, &state);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(1); // distinct from the init stream

    let mut order: Vec<usize> = (0..dataset.train.len()).collect();
    order.shuffle(&mut rng);
    let mut cursor = 0usize;

    let mut log = TrainLog::default();
    let mut best: Option<(f64, EmbeddingState)> = None;
    let mut evals_since_best = 0usize;
    let mut window_loss = 0.0;
    let mut window_pairs = 0usize;

    let mut ent_grads: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    let mut rel_grads: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    let mut tslack_grads: BTreeMap<usize, f64> = BTreeMap::new();

    for iteration in 1..=config.max_iterations {
        if cursor >= order.len() {
            order.shuffle(&mut rng);
            cursor = 0;
        }
        let batch_end = (cursor + config.batch_size).min(order.len());
        let batch = &order[cursor..batch_end];
        cursor = batch_end;

        ent_grads.clear();
        rel_grads.clear();
        tslack_grads.clear();
        let mut slack_grad = 0.0;
        let mut batch_loss = 0.0;
        let mut batch_pairs = 0usize;

        for &idx in batch {
            let pos = dataset.train[idx];
            let (f_pos, g_pos) = score_grad(&state, pos, config.norm);
            let xi_i = match spec.kind {
                LossKind::Sm => state.per_triple_slack.as_ref().expect("soft margin slack vector")[idx],
                _ => state.slack,
            };
            for _ in 0..config.negatives_per_positive {
                let neg = match &bern {
                    Some(stats) => corrupt_bern(pos, stats, n_entities, &mut rng),
                    None => corrupt_uniform(pos, n_entities, &mut rng),
                };
                let (f_neg, g_neg) = score_grad(&state, neg, config.norm);
                if !f_pos.is_finite() || !f_neg.is_finite() {
                    return Err(Error::Numeric {
                        iteration,
                        detail: format!(
                            "scores diverged: f_pos {f_pos}, f_neg {f_neg} for positive {pos:?}; loss spec {spec:?}, lr {}, norm {:?}",
                            config.learning_rate, config.norm
                        ),
                    });
                }
                let out = spec.eval(f_pos, f_neg, xi_i);
                batch_loss += out.value;
                batch_pairs += 1;

                add_scaled(&mut ent_grads, pos.head, &g_pos.d_head, out.d_f_pos, config.dim);
                add_scaled(&mut rel_grads, pos.relation, &g_pos.d_head, out.d_f_pos, config.dim);
                add_scaled(&mut ent_grads, pos.tail, &g_pos.d_head, -out.d_f_pos, config.dim);
                add_scaled(&mut ent_grads, neg.head, &g_neg.d_head, out.d_f_neg, config.dim);
                add_scaled(&mut rel_grads, neg.relation, &g_neg.d_head, out.d_f_neg, config.dim);
                add_scaled(&mut ent_grads, neg.tail, &g_neg.d_head, -out.d_f_neg, config.dim);
                match spec.kind {
                    LossKind::Sm => *tslack_grads.entry(idx).or_insert(0.0) += out.d_xi,
                    k if k.learns_shared_slack() => slack_grad += out.d_xi,
                    _ => {}
                }
            }
        }

        if !batch_loss.is_finite() {
            return Err(Error::Numeric {
                iteration,
                detail: format!(
                    "batch loss is {batch_loss} (batch of {} starting at shuffled position {}); loss spec {spec:?}, lr {}, norm {:?}",
                    batch.len(),
                    batch_end - batch.len(),
                    config.learning_rate,
                    config.norm
                ),
            });
        }

        for (&i, g) in &ent_grads {
            opt.apply_update(&mut state, Param::Entity(i), Gradient::Row(g));
        }
        for (&i, g) in &rel_grads {
            opt.apply_update(&mut state, Param::Relation(i), Gradient::Row(g));
        }
        if slack_grad != 0.0 {
            opt.apply_update(&mut state, Param::Slack, Gradient::Scalar(slack_grad));
        }
        for (&i, &g) in &tslack_grads {
            opt.apply_update(&mut state, Param::TripleSlack(i), Gradient::Scalar(g));
        }
        if config.normalize_entities {
            normalize_entities(&mut state);
        }

        window_loss += batch_loss;
        window_pairs += batch_pairs;

        if iteration % config.eval_every == 0 {
            let (valid_mr, valid_hits) = if dataset.valid.is_empty() {
                (f64::NAN, f64::NAN)
            } else {
                let report = evaluate(&state, &dataset.valid, dataset, config.norm, VALID_K);
                (report.mean_rank_filtered, report.hits_at_k_filtered)
            };
            let record = TrainRecord {
                iteration,
                mean_loss: window_loss / window_pairs.max(1) as f64,
                xi: state.slack,
                margin_width: 2.0 * state.slack.abs(),
                valid_mr,
                valid_hits,
            };
            on_record(&record);
            log.records.push(record);
            window_loss = 0.0;
            window_pairs = 0;

            if !valid_hits.is_nan() {
                let improved = match &best {
                    Some((best_hits, _)) => valid_hits > *best_hits,
                    None => true,
                };
                if improved {
                    best = Some((valid_hits, state.clone()));
                    evals_since_best = 0;
                } else {
                    evals_since_best += 1;
                    if evals_since_best >= config.patience {
                        break;
                    }
                }
            }
        }
    }

    let final_state = match best {
        Some((_, snapshot)) => snapshot,
        None => state,
    };
    Ok((final_state, log))
}

fn add_scaled(map: &mut BTreeMap<usize, Vec<f64>>, key: usize, direction: &[f64], coeff: f64, dim: usize) {
    if coeff == 0.0 {
        return;
    }
    let row = map.entry(key).or_insert_with(|| vec![0.0; dim]);
    for (r, d) in row.iter_mut().zip(direction) {
        *r += coeff * d;
    }
}

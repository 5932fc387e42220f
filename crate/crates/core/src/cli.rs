//! Run configuration and the train/eval/generate entry points.
//!
//! Settings resolve in three layers: command-line flags win over the config
//! file, the config file wins over built-in defaults. The fully resolved
//! configuration is embedded in every output file so a run can be repeated
//! exactly.

use std::fs;
use std::path::{Path, PathBuf};

use crate::checkpoint;
use crate::config::parse_flat_kv;
use crate::data::{load_dataset, write_triples, Dataset, TripleFormat};
use crate::error::{Error, Result};
use crate::eval::{evaluate, EvalReport};
use crate::loss::{margin_bounds, LossKind, LossSpec};
use crate::optim::OptimizerKind;
use crate::sampling::SamplerKind;
use crate::scoring::Norm;
use crate::synthetic::{generate, GeneratorKind, SyntheticSpec};
use crate::train::{train_with, TrainConfig, TrainRecord};

/// Unresolved settings collected from flags and the config file. `None`
/// means "not given"; defaults are applied during resolution.
#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    // dataset paths
    pub train_path: Option<PathBuf>,
    pub valid_path: Option<PathBuf>,
    pub test_path: Option<PathBuf>,
    // loss
    pub loss: Option<LossKind>,
    pub gamma: Option<f64>,
    pub gamma1: Option<f64>,
    pub gamma2: Option<f64>,
    pub lambda: Option<f64>,
    pub lambda_pos: Option<f64>,
    pub lambda_neg: Option<f64>,
    pub sigma: Option<f64>,
    pub m: Option<f64>,
    pub xi_init: Option<f64>,
    // trainer
    pub norm: Option<Norm>,
    pub dim: Option<usize>,
    pub learning_rate: Option<f64>,
    pub optimizer: Option<OptimizerKind>,
    pub batch: Option<usize>,
    pub max_iter: Option<usize>,
    pub sampler: Option<SamplerKind>,
    pub negatives: Option<usize>,
    pub normalize: Option<bool>,
    pub eval_every: Option<usize>,
    pub patience: Option<usize>,
    pub seed: Option<u64>,
    // evaluation and output
    pub k: Option<usize>,
    pub checkpoint: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    // generator
    pub generator: Option<GeneratorKind>,
    pub entities: Option<usize>,
    pub relations: Option<usize>,
    pub density: Option<f64>,
}

impl RunConfig {
    /// Fill unset fields from flat key-value config text (file layer).
    pub fn merge_file(&mut self, text: &str) -> Result<()> {
        for (key, value) in parse_flat_kv(text)? {
            self.set_if_unset(&key, &value)?;
        }
        Ok(())
    }

    fn set_if_unset(&mut self, key: &str, value: &str) -> Result<()> {
        fn num(key: &str, value: &str) -> Result<f64> {
            value.parse().map_err(|_| Error::Config(format!("key {key}: not a number: {value:?}")))
        }
        fn int(key: &str, value: &str) -> Result<usize> {
            value.parse().map_err(|_| Error::Config(format!("key {key}: not an integer: {value:?}")))
        }
        macro_rules! fill {
            ($slot:expr, $val:expr) => {
                if $slot.is_none() {
                    $slot = Some($val);
                }
            };
        }
        match key {
            "train" => fill!(self.train_path, PathBuf::from(value)),
            "valid" => fill!(self.valid_path, PathBuf::from(value)),
            "test" => fill!(self.test_path, PathBuf::from(value)),
            "checkpoint" => fill!(self.checkpoint, PathBuf::from(value)),
            "out" => fill!(self.out_dir, PathBuf::from(value)),
            "loss" => fill!(self.loss, LossKind::parse(value)?),
            "norm" => fill!(self.norm, Norm::parse(value)?),
            "optimizer" => fill!(self.optimizer, OptimizerKind::parse(value)?),
            "sampler" => fill!(self.sampler, SamplerKind::parse(value)?),
            "generator" => fill!(self.generator, GeneratorKind::parse(value)?),
            "normalize" => fill!(
                self.normalize,
                match value {
                    "true" => true,
                    "false" => false,
                    other => {
                        return Err(Error::Config(format!(
                            "key normalize: expected true|false, got {other:?}"
                        )))
                    }
                }
            ),
            "gamma" => fill!(self.gamma, num(key, value)?),
            "gamma1" => fill!(self.gamma1, num(key, value)?),
            "gamma2" => fill!(self.gamma2, num(key, value)?),
            "lambda" => fill!(self.lambda, num(key, value)?),
            "lambda_pos" => fill!(self.lambda_pos, num(key, value)?),
            "lambda_neg" => fill!(self.lambda_neg, num(key, value)?),
            "sigma" => fill!(self.sigma, num(key, value)?),
            "m" => fill!(self.m, num(key, value)?),
            "xi_init" => fill!(self.xi_init, num(key, value)?),
            "density" => fill!(self.density, num(key, value)?),
            "lr" => fill!(self.learning_rate, num(key, value)?),
            "dim" => fill!(self.dim, int(key, value)?),
            "batch" => fill!(self.batch, int(key, value)?),
            "max_iter" => fill!(self.max_iter, int(key, value)?),
            "negatives" => fill!(self.negatives, int(key, value)?),
            "eval_every" => fill!(self.eval_every, int(key, value)?),
            "patience" => fill!(self.patience, int(key, value)?),
            "seed" => fill!(self.seed, int(key, value)? as u64),
            "k" => fill!(self.k, int(key, value)?),
            "entities" => fill!(self.entities, int(key, value)?),
            "relations" => fill!(self.relations, int(key, value)?),
            other => return Err(Error::Config(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Resolve the training configuration, applying the reference defaults
    /// and checking that the chosen loss has its required hyperparameters.
    pub fn train_config(&self) -> Result<TrainConfig> {
        let kind = self
            .loss
            .ok_or_else(|| Error::Config("missing key loss (mrl|rs|sm|aml-exp|aml-con)".to_owned()))?;
        let require = |v: Option<f64>, key: &str| -> Result<f64> {
            v.ok_or_else(|| Error::Config(format!("missing key {key} for loss {}", kind.as_str())))
        };
        let gamma = self.gamma.unwrap_or(15.0);
        // gamma1/gamma2 have no published default; the bound losses must
        // state them. The other kinds record the xi-derived interval.
        let (gamma1, gamma2) = match kind {
            LossKind::Rs => (require(self.gamma1, "gamma1")?, self.gamma2.unwrap_or(f64::INFINITY)),
            LossKind::Sm => (require(self.gamma1, "gamma1")?, require(self.gamma2, "gamma2")?),
            _ => {
                let fallback = margin_bounds(gamma, 0.1);
                (self.gamma1.unwrap_or(fallback.0), self.gamma2.unwrap_or(fallback.1))
            }
        };
        let loss = LossSpec {
            kind,
            gamma,
            gamma1,
            gamma2,
            lambda: self.lambda.unwrap_or(1.0),
            lambda_pos: self.lambda_pos.unwrap_or(1.0),
            lambda_neg: self.lambda_neg.unwrap_or(1.0),
            sigma: self.sigma.unwrap_or(1.0),
            m: self.m.unwrap_or(gamma / 2.0),
        };
        let mut config = TrainConfig::new(loss);
        if let Some(v) = self.norm {
            config.norm = v;
        }
        if let Some(v) = self.dim {
            config.dim = v;
        }
        if let Some(v) = self.learning_rate {
            config.learning_rate = v;
        }
        if let Some(v) = self.optimizer {
            config.optimizer = v;
        }
        if let Some(v) = self.batch {
            config.batch_size = v;
        }
        if let Some(v) = self.max_iter {
            config.max_iterations = v;
        }
        if let Some(v) = self.sampler {
            config.sampler = v;
        }
        if let Some(v) = self.negatives {
            config.negatives_per_positive = v;
        }
        if let Some(v) = self.normalize {
            config.normalize_entities = v;
        }
        if let Some(v) = self.eval_every {
            config.eval_every = v;
        }
        if let Some(v) = self.patience {
            config.patience = v;
        }
        if let Some(v) = self.seed {
            config.seed = v;
        }
        config.xi_init = self.xi_init;
        config.validate()?;
        Ok(config)
    }

    fn out_dir(&self) -> PathBuf {
        self.out_dir.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    fn k(&self) -> usize {
        self.k.unwrap_or(10)
    }

    fn load_dataset_files(&self) -> Result<Dataset> {
        let train = self
            .train_path
            .as_ref()
            .ok_or_else(|| Error::Config("missing key train (path to training triples)".to_owned()))?;
        load_dataset(
            train,
            self.valid_path.as_deref(),
            self.test_path.as_deref(),
            TripleFormat::HeadRelTail,
        )
    }
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    fs::write(path, content).map_err(|e| Error::io(path, e))
}

fn ensure_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

/// Report text: the resolved config (as `config.<key>` entries) followed by
/// the metric record.
fn report_text(config: &TrainConfig, report: &EvalReport) -> String {
    let mut s = String::new();
    for (k, v) in parse_flat_kv(&config.to_kv()).expect("own config text parses") {
        s.push_str(&format!("config.{k}\t{v}\n"));
    }
    s.push_str(&report.flat_record());
    s
}

/// Train, checkpoint, and report on the test split. Writes `trainlog.tsv`,
/// the checkpoint, and (when a test split exists) `report.tsv` plus
/// `ranks.tsv` under the output directory.
pub fn run_train(run: &RunConfig) -> Result<()> {
    let config = run.train_config()?;
    let dataset = run.load_dataset_files()?;
    let out = run.out_dir();
    ensure_dir(&out)?;
    let ckpt_path = run.checkpoint.clone().unwrap_or_else(|| out.join("model.ckpt"));

    let mut log_text = String::new();
    for line in config.to_kv().lines() {
        log_text.push_str(&format!("# {line}\n"));
    }
    log_text.push_str(&format!("# {}\n", TrainRecord::header()));
    let (state, log) = train_with(&dataset, &config, |record| {
        log_text.push_str(&record.line());
        log_text.push('\n');
        eprintln!(
            "iter {:>8}  loss {:>10.6}  width {:>8.4}  valid hits@10 {:>6.2}",
            record.iteration, record.mean_loss, record.margin_width, record.valid_hits
        );
    })?;
    write_file(&out.join("trainlog.tsv"), &log_text)?;
    checkpoint::save(&state, &dataset.vocab, &config, &ckpt_path)?;
    eprintln!("checkpoint written to {}", ckpt_path.display());

    if !dataset.test.is_empty() {
        let report = evaluate(&state, &dataset.test, &dataset, config.norm, run.k());
        write_file(&out.join("report.tsv"), &report_text(&config, &report))?;
        write_file(&out.join("ranks.tsv"), &report.per_triple_tsv(&dataset.vocab))?;
        println!("{}", report.summary());
    } else if !log.records.is_empty() {
        println!("training finished; no test split to report on");
    }
    Ok(())
}

/// Evaluate a checkpoint on the test split of the given dataset files.
pub fn run_eval(run: &RunConfig) -> Result<()> {
    let ckpt_path = run
        .checkpoint
        .as_ref()
        .ok_or_else(|| Error::Config("missing key checkpoint (path to a model)".to_owned()))?;
    let (state, vocab, config) = checkpoint::load(ckpt_path)?;
    let dataset = run.load_dataset_files()?.reindexed(&vocab)?;
    if dataset.test.is_empty() {
        return Err(Error::Data("evaluation needs a non-empty test split".to_owned()));
    }
    let out = run.out_dir();
    ensure_dir(&out)?;
    let report = evaluate(&state, &dataset.test, &dataset, config.norm, run.k());
    write_file(&out.join("report.tsv"), &report_text(&config, &report))?;
    write_file(&out.join("ranks.tsv"), &report.per_triple_tsv(&dataset.vocab))?;
    println!("{}", report.summary());
    Ok(())
}

/// Generate a synthetic dataset and write its three split files.
pub fn run_generate(run: &RunConfig) -> Result<()> {
    let kind = run
        .generator
        .ok_or_else(|| Error::Config("missing key generator (chain|clustered|random-er)".to_owned()))?;
    let entities = run
        .entities
        .ok_or_else(|| Error::Config("missing key entities (entity count)".to_owned()))?;
    let relations = run
        .relations
        .ok_or_else(|| Error::Config("missing key relations (relation count)".to_owned()))?;
    let spec = SyntheticSpec {
        kind,
        entities,
        relations,
        density: run.density.unwrap_or(1.0),
        seed: run.seed.unwrap_or(0),
    };
    // generate fully in memory before touching the filesystem, so a
    // degenerate spec leaves no partial files behind
    let dataset = generate(&spec)?;
    let out = run.out_dir();
    ensure_dir(&out)?;
    write_triples(&out.join("train.txt"), &dataset.train, &dataset.vocab)?;
    write_triples(&out.join("valid.txt"), &dataset.valid, &dataset.vocab)?;
    write_triples(&out.join("test.txt"), &dataset.test, &dataset.vocab)?;
    println!(
        "wrote {} train / {} valid / {} test triples to {}",
        dataset.train.len(),
        dataset.valid.len(),
        dataset.test.len(),
        out.display()
    );
    Ok(())
}

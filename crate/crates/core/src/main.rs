use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use kgem::cli::{run_eval, run_generate, run_train, RunConfig};
use kgem::error::{Error, ErrorCategory};
use kgem::loss::LossKind;
use kgem::optim::OptimizerKind;
use kgem::sampling::SamplerKind;
use kgem::scoring::Norm;
use kgem::synthetic::GeneratorKind;

#[derive(Parser)]
#[command(name = "kgem", version, about = "Knowledge graph embeddings with adaptive margin losses")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model and report on the test split
    Train(CommonArgs),
    /// Evaluate a checkpoint on a dataset
    Eval(CommonArgs),
    /// Generate a synthetic dataset as triple TSV files
    Generate(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Flat key-value config file; flags override its entries
    #[arg(long)]
    config: Option<PathBuf>,

    /// Training triples (TSV: head, relation, tail)
    #[arg(long)]
    train: Option<PathBuf>,
    /// Validation triples
    #[arg(long)]
    valid: Option<PathBuf>,
    /// Test triples
    #[arg(long)]
    test: Option<PathBuf>,

    /// Loss function
    #[arg(long, value_parser = parse_loss)]
    loss: Option<LossKind>,
    /// Margin (mrl) or margin center (aml)
    #[arg(long)]
    gamma: Option<f64>,
    /// Upper bound on positive scores (rs, sm)
    #[arg(long)]
    gamma1: Option<f64>,
    /// Lower bound on negative scores (sm)
    #[arg(long)]
    gamma2: Option<f64>,
    /// Slack regularizer weight (and rs bound weight)
    #[arg(long)]
    lambda: Option<f64>,
    /// Positive hinge weight
    #[arg(long = "lambda-pos")]
    lambda_pos: Option<f64>,
    /// Negative hinge weight
    #[arg(long = "lambda-neg")]
    lambda_neg: Option<f64>,
    /// Gaussian kernel width (aml-exp)
    #[arg(long)]
    sigma: Option<f64>,
    /// Initial slack for aml-con
    #[arg(long)]
    m: Option<f64>,
    /// Initial slack override
    #[arg(long = "xi-init")]
    xi_init: Option<f64>,

    /// Score norm
    #[arg(long, value_parser = parse_norm)]
    norm: Option<Norm>,
    /// Embedding dimension
    #[arg(long)]
    dim: Option<usize>,
    /// Learning rate
    #[arg(long)]
    lr: Option<f64>,
    /// Optimizer
    #[arg(long, value_parser = parse_optimizer)]
    optimizer: Option<OptimizerKind>,
    /// Batch size
    #[arg(long)]
    batch: Option<usize>,
    /// Training iterations (batches)
    #[arg(long = "max-iter")]
    max_iter: Option<usize>,
    /// Negative sampler
    #[arg(long, value_parser = parse_sampler)]
    sampler: Option<SamplerKind>,
    /// Negatives per positive
    #[arg(long)]
    negatives: Option<usize>,
    /// Renormalize entity rows after each batch (true|false)
    #[arg(long)]
    normalize: Option<bool>,
    /// Validate every N iterations
    #[arg(long = "eval-every")]
    eval_every: Option<usize>,
    /// Evaluations without improvement before stopping
    #[arg(long)]
    patience: Option<usize>,
    /// RNG seed
    #[arg(long)]
    seed: Option<u64>,

    /// Hits@K cutoff
    #[arg(long)]
    k: Option<usize>,
    /// Checkpoint path (written by train, read by eval)
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for evaluation
    #[arg(long, env = "KGEM_WORKERS")]
    workers: Option<usize>,

    /// Synthetic generator
    #[arg(long, value_parser = parse_generator)]
    generator: Option<GeneratorKind>,
    /// Synthetic entity count
    #[arg(long)]
    entities: Option<usize>,
    /// Synthetic relation count
    #[arg(long)]
    relations: Option<usize>,
    /// Synthetic triple density (random-er)
    #[arg(long)]
    density: Option<f64>,
}

fn parse_loss(s: &str) -> Result<LossKind, String> {
    LossKind::parse(s).map_err(|e| e.to_string())
}

fn parse_norm(s: &str) -> Result<Norm, String> {
    Norm::parse(s).map_err(|e| e.to_string())
}

fn parse_optimizer(s: &str) -> Result<OptimizerKind, String> {
    OptimizerKind::parse(s).map_err(|e| e.to_string())
}

fn parse_sampler(s: &str) -> Result<SamplerKind, String> {
    SamplerKind::parse(s).map_err(|e| e.to_string())
}

fn parse_generator(s: &str) -> Result<GeneratorKind, String> {
    GeneratorKind::parse(s).map_err(|e| e.to_string())
}

impl CommonArgs {
    fn into_run_config(self) -> Result<RunConfig, Error> {
        let mut run = RunConfig {
            train_path: self.train,
            valid_path: self.valid,
            test_path: self.test,
            loss: self.loss,
            gamma: self.gamma,
            gamma1: self.gamma1,
            gamma2: self.gamma2,
            lambda: self.lambda,
            lambda_pos: self.lambda_pos,
            lambda_neg: self.lambda_neg,
            sigma: self.sigma,
            m: self.m,
            xi_init: self.xi_init,
            norm: self.norm,
            dim: self.dim,
            learning_rate: self.lr,
            optimizer: self.optimizer,
            batch: self.batch,
            max_iter: self.max_iter,
            sampler: self.sampler,
            negatives: self.negatives,
            normalize: self.normalize,
            eval_every: self.eval_every,
            patience: self.patience,
            seed: self.seed,
            k: self.k,
            checkpoint: self.checkpoint,
            out_dir: self.out,
            generator: self.generator,
            entities: self.entities,
            relations: self.relations,
            density: self.density,
        };
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read config file {}: {e}", path.display())))?;
            run.merge_file(&text)?;
        }
        Ok(run)
    }
}

type Runner = fn(&RunConfig) -> Result<(), Error>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (args, runner): (CommonArgs, Runner) = match cli.command {
        Command::Train(a) => (a, run_train),
        Command::Eval(a) => (a, run_eval),
        Command::Generate(a) => (a, run_generate),
    };
    let workers = args.workers;
    let result = args.into_run_config().and_then(|run| {
        if let Some(n) = workers {
            // ignore the error if a pool already exists (e.g. repeated calls in tests)
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        runner(&run)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(match err.category() {
                ErrorCategory::Config => 2,
                ErrorCategory::Data => 3,
                ErrorCategory::Numeric => 4,
            })
        }
    }
}

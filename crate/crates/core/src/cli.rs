//! Command-line front end: `cooccur`, `train`, `simulate`, `bench` and
//! `featurize`.
//!
//! ```text
//! warmglove cooccur --window 10 --min-count 5 --out X.cooc corpus.txt
//! warmglove train --cooc X.cooc --epochs 1000 --priors glove.txt --out vectors.txt --report report.csv
//! warmglove simulate --size 500 --density 0.10 --prior-frac 0.5 --trials 5 --out sweep.csv
//! warmglove bench --sizes 5000,10000,20000 --iters 10 --corpora 5 --out bench.csv
//! warmglove featurize --embeddings vectors.txt --in docs.txt --out features.csv
//! ```
//!
//! Any flag may also be given in a `--config` file of `key = value` lines
//! (`#` starts a comment). Flags on the command line take precedence.
//! Exit status is 0 on success, 1 on a usage error and 2 on a runtime error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{run_mu_sweep_with, CorrelationMode, SimulationSpec, SweepOptions, DEFAULT_MU_GRID};
use crate::bench::{available_memory, emit_bench_table, format_bench_table, run_bench_with, BenchSpec, Implementation};
use crate::cooccur::{build_cooccurrence, CooccurrenceMatrix};
use crate::corpus::{tokenize, TokenCounts, TokenizerConfig, Vocabulary};
use crate::embedding_io::{read_embeddings, resolve_priors, write_embeddings, EmbeddingFile};
use crate::error::{Error, Result};
use crate::featurize::{featurize_documents, save_features};
use crate::objective::{DenseObjective, HyperParams};
use crate::trainer::{compose_embeddings, train_with, TrainOptions};

#[derive(Debug, Parser)]
#[command(name = "warmglove", version, about = "GloVe and Mittens embeddings", args_override_self = true)]
pub struct Cli {
    /// Plain-text `key = value` file supplying default flag values.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Worker threads [default: all cores].
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Count windowed co-occurrences in text files, one document per line.
    #[command(args_override_self = true)]
    Cooccur(CooccurArgs),
    /// Train embeddings on a co-occurrence matrix.
    #[command(args_override_self = true)]
    Train(TrainArgs),
    /// Sweep the retrofitting weight on simulated count matrices.
    #[command(args_override_self = true)]
    Simulate(SimulateArgs),
    /// Time the vectorized and per-pair training steps.
    #[command(args_override_self = true)]
    Bench(BenchArgs),
    /// Sum word vectors into one feature row per document.
    #[command(args_override_self = true)]
    Featurize(FeaturizeArgs),
}

#[derive(Debug, Args)]
pub struct CooccurArgs {
    /// Words on each side considered context.
    #[arg(long, default_value_t = 10)]
    pub window: usize,
    /// Drop tokens seen fewer times than this.
    #[arg(long, default_value_t = 1)]
    pub min_count: u64,
    /// Matrix output path.
    #[arg(long)]
    pub out: PathBuf,
    /// Vocabulary output path [default: OUT with extension .vocab].
    #[arg(long)]
    pub vocab_out: Option<PathBuf>,
    /// Emoticon lexicon replacing the built-in one.
    #[arg(long)]
    pub emoticons: Option<PathBuf>,
    /// Input text files.
    #[arg(required = true, value_name = "CORPUS")]
    pub corpus: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Embedding dimension.
    #[arg(long, default_value_t = 50)]
    pub dim: usize,
    /// Exponent of the weighting function.
    #[arg(long, default_value_t = 0.75)]
    pub alpha: f64,
    /// Count at which the weighting function saturates.
    #[arg(long, default_value_t = 100.0)]
    pub x_max: f64,
    /// AdaGrad learning rate.
    #[arg(long, default_value_t = 0.05)]
    pub lr: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl ModelArgs {
    fn hyper(&self, mu: f64, epochs: usize) -> HyperParams {
        HyperParams {
            dim: self.dim,
            alpha: self.alpha,
            x_max: self.x_max,
            learning_rate: self.lr,
            mu,
            epochs,
            g_fill: 0.0,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Co-occurrence matrix.
    #[arg(long)]
    pub cooc: PathBuf,
    /// Vocabulary [default: COOC with extension .vocab].
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Weight of the penalty pulling embeddings toward their priors.
    #[arg(long, default_value_t = 0.1)]
    pub mu: f64,
    #[arg(long, default_value_t = 50_000)]
    pub epochs: usize,
    /// Pretrained vectors to retrofit toward.
    #[arg(long)]
    pub priors: Option<PathBuf>,
    /// Start words with priors at their prior vectors.
    #[arg(long)]
    pub init_at_priors: bool,
    /// Embedding output path.
    #[arg(long)]
    pub out: PathBuf,
    /// Per-epoch `epoch,cost,seconds` CSV.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Print the cost every N epochs to stderr (0 disables).
    #[arg(long, default_value_t = 1)]
    pub log_every: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CorrelationArg {
    ModelScore,
    EmbeddingDot,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Vocabulary size of each simulated matrix.
    #[arg(long, default_value_t = 500)]
    pub size: usize,
    /// Fraction of non-zero cells.
    #[arg(long, default_value_t = 0.10)]
    pub density: f64,
    /// Fraction of words given a prior vector.
    #[arg(long, default_value_t = 0.5)]
    pub prior_frac: f64,
    #[arg(long, default_value_t = 5)]
    pub trials: usize,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_MU_GRID.to_vec())]
    pub mu_grid: Vec<f64>,
    #[arg(long, default_value_t = 2000)]
    pub epochs: usize,
    /// Train for 50000 epochs, overriding --epochs.
    #[arg(long)]
    pub full: bool,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, default_value_t = CorrelationArg::ModelScore)]
    pub correlation: CorrelationArg,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ArmArg {
    Vectorized,
    LoopReference,
    NoOp,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_values_t = vec![5000usize, 10000, 20000])]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 0.10)]
    pub density: f64,
    /// Timed iterations per simulated matrix.
    #[arg(long, default_value_t = 10)]
    pub iters: usize,
    /// Simulated matrices per size.
    #[arg(long, default_value_t = 5)]
    pub corpora: usize,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = vec![ArmArg::Vectorized, ArmArg::LoopReference])]
    pub arms: Vec<ArmArg>,
    #[arg(long, default_value_t = 50)]
    pub dim: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Leave out sizes that do not fit in memory instead of failing.
    #[arg(long)]
    pub skip_oversized: bool,
    /// CSV output; an aligned table is written beside it with extension .txt.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FeaturizeArgs {
    #[arg(long)]
    pub embeddings: PathBuf,
    /// Documents, one per line.
    #[arg(long = "in", value_name = "PATH")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

fn usage(e: Error) -> Failure {
    Failure::Usage(e.to_string())
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// process exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let argv = match with_config_defaults(argv) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: {msg}");
            return 1;
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    match pool.install(|| dispatch(cli.command)) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            2
        }
    }
}

/// Splices `--key value` pairs from a `--config` file in right after the
/// subcommand name, so that flags given explicitly come later and win.
fn with_config_defaults(argv: Vec<OsString>) -> std::result::Result<Vec<OsString>, String> {
    let mut config = None;
    let mut sub_pos = None;
    let mut k = 1;
    while k < argv.len() {
        let a = argv[k].to_string_lossy();
        if a == "--config" {
            config = argv.get(k + 1).cloned();
            k += 2;
            continue;
        }
        if let Some(p) = a.strip_prefix("--config=") {
            config = Some(p.into());
        } else if a == "--threads" {
            k += 2;
            continue;
        } else if sub_pos.is_none() && !a.starts_with('-') {
            sub_pos = Some(k);
        }
        k += 1;
    }
    let (Some(path), Some(pos)) = (config, sub_pos) else {
        return Ok(argv);
    };
    let extra = parse_config_file(Path::new(&path))?;
    let mut out = argv;
    let tail = out.split_off(pos + 1);
    out.extend(extra);
    out.extend(tail);
    Ok(out)
}

fn parse_config_file(path: &Path) -> std::result::Result<Vec<OsString>, String> {
    let f = File::open(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let mut args = Vec::new();
    for (n, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(format!("{}:{}: expected `key = value`", path.display(), n + 1));
        };
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        match value {
            "true" => args.push(format!("--{key}").into()),
            "false" => {}
            _ => {
                args.push(format!("--{key}").into());
                args.push(value.into());
            }
        }
    }
    Ok(args)
}

fn dispatch(cmd: Command) -> std::result::Result<(), Failure> {
    match cmd {
        Command::Cooccur(a) => cooccur(a),
        Command::Train(a) => train(a),
        Command::Simulate(a) => simulate(a),
        Command::Bench(a) => bench(a),
        Command::Featurize(a) => featurize(a),
    }
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    BufReader::new(f)
        .lines()
        .collect::<std::io::Result<_>>()
        .map_err(|e| Error::io(path, e))
}

fn cooccur(a: CooccurArgs) -> std::result::Result<(), Failure> {
    if a.window < 1 {
        return Err(Failure::Usage("--window must be at least 1".into()));
    }
    if a.min_count < 1 {
        return Err(Failure::Usage("--min-count must be at least 1".into()));
    }
    let mut cfg = TokenizerConfig::default();
    if let Some(p) = &a.emoticons {
        cfg = cfg.with_lexicon_file(p)?;
    }
    let mut docs = Vec::new();
    for path in &a.corpus {
        for line in read_lines(path)? {
            docs.push(tokenize(&line, &cfg));
        }
    }
    let mut counts = TokenCounts::new();
    for d in &docs {
        counts.extend(d);
    }
    let vocab = Vocabulary::from_counts(counts, a.min_count)?;
    let x = build_cooccurrence(&docs, &vocab, a.window)?;
    x.save(&a.out)?;
    let vocab_path = a.vocab_out.unwrap_or_else(|| a.out.with_extension("vocab"));
    vocab.save(&vocab_path)?;
    eprintln!(
        "{} documents, {} words, {} non-zero cells -> {}, {}",
        docs.len(),
        vocab.len(),
        x.nnz(),
        a.out.display(),
        vocab_path.display()
    );
    Ok(())
}

fn check_dense_fits(vocab_size: usize) -> Result<()> {
    let needed = DenseObjective::memory_bytes(vocab_size);
    match available_memory() {
        Some(avail) if needed > avail => Err(Error::OutOfMemory {
            size: vocab_size,
            needed_mib: needed >> 20,
            available_mib: avail >> 20,
        }),
        _ => Ok(()),
    }
}

fn train(a: TrainArgs) -> std::result::Result<(), Failure> {
    let hp = a.model.hyper(a.mu, a.epochs);
    hp.validate().map_err(usage)?;
    let x = CooccurrenceMatrix::load(&a.cooc)?;
    let vocab_path = a.vocab.clone().unwrap_or_else(|| a.cooc.with_extension("vocab"));
    let vocab = Vocabulary::load(&vocab_path)?;
    if vocab.len() != x.dim() {
        return Err(Error::Shape(format!(
            "vocabulary has {} words but the matrix is {}x{}",
            vocab.len(),
            x.dim(),
            x.dim()
        ))
        .into());
    }
    check_dense_fits(x.dim())?;
    let priors = match &a.priors {
        Some(p) => {
            let emb = read_embeddings(p)?;
            let priors = resolve_priors(&emb, &vocab, hp.dim)?;
            eprintln!("{} of {} words have priors", priors.len(), vocab.len());
            Some(priors)
        }
        None => None,
    };
    let (log_every, epochs) = (a.log_every, a.epochs);
    let log = move |epoch: usize, cost: f64| {
        if log_every > 0 && (epoch.is_multiple_of(log_every) || epoch + 1 == epochs) {
            eprintln!("epoch {epoch} cost {cost}");
        }
    };
    let opts = TrainOptions {
        init_at_priors: a.init_at_priors,
        on_epoch: Some(&log),
    };
    let trained = train_with(&x, &hp, priors.as_ref(), &opts)?;
    let emb = EmbeddingFile::from_matrix(vocab.tokens(), compose_embeddings(&trained.params))?;
    write_embeddings(&emb, &a.out)?;
    if let Some(r) = &a.report {
        trained.report.save_csv(r)?;
    }
    Ok(())
}

fn simulate(a: SimulateArgs) -> std::result::Result<(), Failure> {
    let epochs = if a.full { 50_000 } else { a.epochs };
    let hp = a.model.hyper(0.0, epochs);
    let spec = SimulationSpec {
        vocab_size: a.size,
        density: a.density,
        prior_fraction: a.prior_frac,
        mu_grid: a.mu_grid,
        trials: a.trials,
        seed: a.model.seed,
    };
    spec.validate().map_err(usage)?;
    hp.validate().map_err(usage)?;
    let report = |r: &crate::analysis::SweepRow| {
        eprintln!(
            "trial {} mu {} correlation {:.4} dist_with_prior {}",
            r.trial,
            r.mu,
            r.correlation,
            r.dist_with_prior.map_or("-".into(), |d| format!("{d:.4}"))
        );
    };
    let opts = SweepOptions {
        correlation_mode: match a.correlation {
            CorrelationArg::ModelScore => CorrelationMode::ModelScore,
            CorrelationArg::EmbeddingDot => CorrelationMode::EmbeddingDot,
        },
        on_row: Some(&report),
    };
    let result = run_mu_sweep_with(&spec, &hp, &opts)?;
    result.save_csv(&a.out)?;
    Ok(())
}

fn bench(a: BenchArgs) -> std::result::Result<(), Failure> {
    let mut spec = BenchSpec {
        vocab_sizes: a.sizes,
        density: a.density,
        iterations_per_corpus: a.iters,
        corpora: a.corpora,
        seed: a.seed,
        implementations: a
            .arms
            .iter()
            .map(|arm| match arm {
                ArmArg::Vectorized => Implementation::Vectorized,
                ArmArg::LoopReference => Implementation::LoopReference,
                ArmArg::NoOp => Implementation::NoOp,
            })
            .collect(),
        hp: HyperParams {
            dim: a.dim,
            ..HyperParams::default()
        },
    };
    spec.validate().map_err(usage)?;
    if a.skip_oversized {
        let mut kept = Vec::new();
        for &v in &spec.vocab_sizes {
            match spec.check_memory(v) {
                Ok(()) => kept.push(v),
                Err(e) => eprintln!("skipping: {e}"),
            }
        }
        if kept.is_empty() {
            return Err(Failure::Runtime(Error::InvalidParameter(
                "no vocabulary size fits in memory".into(),
            )));
        }
        spec.vocab_sizes = kept;
    }
    let report = run_bench_with(&spec, |r| {
        eprintln!(
            "{} |V|={} mean {:.4}s sd {}",
            r.implementation.name(),
            r.vocab_size,
            r.mean_s,
            r.stddev_s.map_or("-".into(), |s| format!("{s:.4}s"))
        );
    })?;
    emit_bench_table(&report, &a.out)?;
    print!("{}", format_bench_table(&report));
    Ok(())
}

fn featurize(a: FeaturizeArgs) -> std::result::Result<(), Failure> {
    let emb = read_embeddings(&a.embeddings)?;
    let cfg = TokenizerConfig::default();
    let docs: Vec<Vec<String>> = read_lines(&a.input)?
        .iter()
        .map(|l| tokenize(l, &cfg))
        .collect();
    let features = featurize_documents(&docs, &emb)?;
    save_features(&features, &a.out)?;
    let oov: usize = features.iter().map(|d| d.tokens_oov).sum();
    let used: usize = features.iter().map(|d| d.tokens_used).sum();
    eprintln!("{} documents, {used} tokens used, {oov} unknown", features.len());
    Ok(())
}

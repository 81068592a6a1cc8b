mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ngdb::fuzzy::Logic;
use ngdb::kg::Layer;
use ngdb::Error;

/// Complex query answering over incomplete knowledge graphs.
///
/// Exit codes: 0 ok, 1 other failure, 2 parse or configuration error,
/// 3 sampling exhausted, 4 training diverged, 5 unsupported pattern or operator.
/// Logging level is read from NGDB_LOG (default `info`).
#[derive(Debug, Parser)]
#[command(name = "ngdb", version)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse TSV splits into a binary graph stack.
    Ingest(IngestArgs),
    /// Sample labeled query datasets.
    Sample(SampleArgs),
    /// Train ComplEx link-predictor embeddings.
    Train(TrainArgs),
    /// Write the top entities of every query.
    Answer(AnswerArgs),
    /// Filtered ranking report over hard answers.
    Eval(EvalArgs),
    /// Recompute easy/hard labels with the exact symbolic engine.
    Oracle(OracleArgs),
    /// Write a synthetic graph as TSV splits.
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    graph_dir: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    valid: Option<PathBuf>,
    #[arg(long)]
    test: Option<PathBuf>,
    /// Output directory for `graph.bin`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    negatives: Option<usize>,
    /// Margin γ.
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    l2: Option<f64>,
    /// logsigmoid, margin or cross-entropy.
    #[arg(long)]
    loss: Option<String>,
    /// Directory for `embeddings.bin` and `loss.csv`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EngineArgs {
    /// symbolic, continuous or beam.
    #[arg(long)]
    engine: Option<String>,
    #[arg(long)]
    logic: Option<Logic>,
    /// Beam width.
    #[arg(long)]
    k: Option<usize>,
    /// Trained embeddings; without them fuzzy engines read boolean rows of --layer.
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// Graph layer for the symbolic engine and boolean rows.
    #[arg(long, default_value = "train")]
    layer: Layer,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    cache_size: Option<usize>,
}

#[derive(Debug, Args)]
pub struct AnswerArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    engine: EngineArgs,
    #[arg(long)]
    queries: PathBuf,
    #[arg(long, default_value_t = 10)]
    top: usize,
    /// Output JSONL; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    engine: EngineArgs,
    #[arg(long)]
    queries: PathBuf,
    #[arg(long)]
    report: PathBuf,
    /// Add easy-vs-hard AUC.
    #[arg(long)]
    faithfulness: bool,
    /// Add cardinality Spearman and MAPE.
    #[arg(long)]
    cardinality: bool,
    #[arg(long)]
    threshold: Option<f64>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    queries: PathBuf,
    /// Layer whose answers are labeled against the training layer.
    #[arg(long, default_value = "test")]
    layer: Layer,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum GraphKind {
    Planted,
    Random,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum, default_value = "planted")]
    kind: GraphKind,
    #[arg(long, default_value_t = 200)]
    entities: usize,
    #[arg(long, default_value_t = 6)]
    relations: usize,
    /// Triples of a random graph.
    #[arg(long, default_value_t = 2000)]
    triples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Parse { .. }
        | Error::Schema { .. }
        | Error::Json(_)
        | Error::Format(_)
        | Error::Validation(_)
        | Error::InvalidInput(_)
        | Error::UnknownName { .. } => 2,
        Error::SamplingExhausted { .. } => 3,
        Error::TrainingDiverged { .. } => 4,
        Error::UnsupportedPattern(_) | Error::UnsupportedOperator(_) => 5,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("NGDB_LOG", "info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Ingest(a) => commands::ingest(a),
        Command::Sample(a) => commands::sample(a),
        Command::Train(a) => commands::train(a),
        Command::Answer(a) => commands::answer(a),
        Command::Eval(a) => commands::eval(a),
        Command::Oracle(a) => commands::oracle(a),
        Command::Generate(a) => commands::generate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

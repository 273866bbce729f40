//! `disclocus` command-line front end.

mod commands;
mod common;
mod manifest;

use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "disclocus", version, about = "Learn the real discriminant locus of a parameterized polynomial system")]
struct Cli {
    /// Worker threads for sampling, labeling and prediction.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample and label a dataset.
    Generate(GenerateArgs),
    /// Fit a KNN or MLP classifier to dataset files.
    Train(TrainArgs),
    /// Accuracy of a model on a dataset.
    Eval(EvalArgs),
    /// Decision grid of a model over a 2-D slice, as CSV and PPM.
    Grid(GridArgs),
    /// Real solutions at query points through the nearest seed.
    SolveReal(SolveRealArgs),
    /// Real-homotopy timing and success table.
    Benchmark(BenchmarkArgs),
    /// Real crossings of one line with the discriminant.
    Witness(WitnessArgs),
}

/// Which polynomial family to work with.
#[derive(Args, Clone, Serialize)]
pub struct SystemArgs {
    /// Built-in model: quadratic, cubic, conjsquare, kuramoto<N>.
    #[arg(long, required_unless_present = "system", conflicts_with = "system")]
    pub model: Option<String>,
    /// System in the plain-text format.
    #[arg(long)]
    pub system: Option<PathBuf>,
    /// Parameter box as `lo hi` pairs, one per parameter; defaults to the
    /// model's box.
    #[arg(long = "box", num_args = 2.., allow_negative_numbers = true)]
    pub bounds: Option<Vec<f64>>,
    /// Reuse (or create) cached generic solves at this path.
    #[arg(long)]
    pub start_cache: Option<PathBuf>,
    /// Imaginary parts below this count as real.
    #[arg(long, default_value_t = 1e-6)]
    pub tol_im: f64,
}

#[derive(Args, Serialize)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub sys: SystemArgs,
    #[arg(long, default_value_t = 0.01)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0)]
    pub uniform: usize,
    #[arg(long, default_value_t = 0)]
    pub lines: usize,
    /// Intervals between crossings shorter than this are skipped.
    #[arg(long, default_value_t = 1e-4)]
    pub min_interval: f64,
    #[arg(long)]
    pub store_solutions: bool,
    #[arg(long, env = "DISCLOCUS_SEED", default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Serialize)]
pub struct TrainArgs {
    /// Dataset files; repeat to combine.
    #[arg(long, required = true)]
    pub data: Vec<PathBuf>,
    /// Sample categories to train on (near_boundary, near_center, uniform).
    #[arg(long, value_delimiter = ',')]
    pub categories: Vec<String>,
    /// knn or mlp.
    #[arg(long, default_value = "knn")]
    pub kind: String,
    #[arg(long, default_value_t = 1)]
    pub knn_k: usize,
    /// Hidden layer widths.
    #[arg(long, value_delimiter = ',', default_value = "20,20,20")]
    pub arch: Vec<usize>,
    /// relu or tanh.
    #[arg(long, default_value = "tanh")]
    pub activation: String,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub lr_min: Option<f64>,
    /// Epochs without improvement before the rate is halved.
    #[arg(long)]
    pub patience: Option<usize>,
    #[arg(long)]
    pub max_epochs: Option<usize>,
    #[arg(long, env = "DISCLOCUS_SEED", default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Serialize)]
pub struct EvalArgs {
    #[arg(long)]
    pub model_file: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_delimiter = ',')]
    pub categories: Vec<String>,
    /// Results CSV to append a `train,test,accuracy,count` row to.
    #[arg(long)]
    pub results: Option<PathBuf>,
    /// Row name for the training set; derived from the model file by default.
    #[arg(long)]
    pub train_name: Option<String>,
    #[arg(long)]
    pub test_name: Option<String>,
}

#[derive(Args, Serialize)]
pub struct GridArgs {
    #[arg(long)]
    pub model_file: PathBuf,
    /// Box as `lo hi` pairs; taken from `--data` when omitted.
    #[arg(long = "box", num_args = 2.., allow_negative_numbers = true)]
    pub bounds: Option<Vec<f64>>,
    /// Dataset whose box is used.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, default_value_t = 512)]
    pub resolution: usize,
    /// Parameter axes spanned by the grid.
    #[arg(long, value_delimiter = ',', default_value = "0,1")]
    pub axes: Vec<usize>,
    /// Values of the remaining parameters; box centre by default.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub base: Option<Vec<f64>>,
    /// Writes `<out>.csv` and `<out>.ppm`.
    #[arg(long)]
    pub out: PathBuf,
}

/// Seed bank built from stored-solution datasets.
#[derive(Args, Clone, Serialize)]
pub struct BankArgs {
    /// Datasets generated with `--store-solutions`.
    #[arg(long, required = true)]
    pub bank: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub bank_categories: Vec<String>,
}

#[derive(Args, Serialize)]
pub struct SolveRealArgs {
    #[command(flatten)]
    pub sys: SystemArgs,
    #[command(flatten)]
    pub bank: BankArgs,
    /// Query point `p1,p2,...`; repeatable.
    #[arg(long, allow_hyphen_values = true)]
    pub point: Vec<String>,
    /// Number of uniform queries over the box, used when no point is given.
    #[arg(long, default_value_t = 0)]
    pub queries: usize,
    /// Also run the full homotopy and compare.
    #[arg(long)]
    pub verify: bool,
    #[arg(long, env = "DISCLOCUS_SEED", default_value_t = 1)]
    pub seed: u64,
    /// JSON lines file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
pub struct BenchmarkArgs {
    #[command(flatten)]
    pub sys: SystemArgs,
    #[command(flatten)]
    pub bank: BankArgs,
    #[arg(long, default_value_t = 200)]
    pub queries: usize,
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    #[arg(long, env = "DISCLOCUS_SEED", default_value_t = 1)]
    pub seed: u64,
    /// CSV `tracked_paths,count,avg_seconds,success_rate`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Serialize)]
pub struct WitnessArgs {
    #[command(flatten)]
    pub sys: SystemArgs,
    /// Base point of the line; random in the box by default.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub point: Option<Vec<f64>>,
    /// Direction of the line; random unit vector by default.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub direction: Option<Vec<f64>>,
    #[arg(long, env = "DISCLOCUS_SEED", default_value_t = 1)]
    pub seed: u64,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    anyhow::ensure!(cli.jobs > 0, "--jobs must be at least 1");
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build()?;
    pool.install(|| match cli.command {
        Command::Generate(a) => commands::generate(&a),
        Command::Train(a) => commands::train(&a),
        Command::Eval(a) => commands::eval(&a),
        Command::Grid(a) => commands::grid(&a),
        Command::SolveReal(a) => commands::solve_real(&a),
        Command::Benchmark(a) => commands::benchmark(&a),
        Command::Witness(a) => commands::witness(&a),
    })
}

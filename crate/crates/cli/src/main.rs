//! Command-line surface: detect anomalies on a dataset, benchmark the hull
//! peeler against the isolation forest, generate synthetic fixtures, and run
//! the Gaussian-noise robustness sweep.
//!
//! Exit codes: 0 success, 1 runtime or data error, 2 usage error.

mod commands;
mod report;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "hullpeel",
    version,
    about = "Convex-hull volume-peeling anomaly detection"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the hull-peeling detector on a CSV dataset.
    Detect(DetectArgs),
    /// Benchmark hull-peeling configurations against the isolation forest.
    Bench(BenchArgs),
    /// Write a synthetic fixture dataset to CSV.
    Synth(SynthArgs),
    /// Re-run detection under increasing Gaussian noise and report mean
    /// metrics per level.
    NoiseSweep(NoiseSweepArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReduceArg {
    Pca,
    External,
    None,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StopArg {
    Naive,
    Elbow,
    Optimal,
    /// Diagnostic rule: stop at the maximum of the recorded objective.
    MaxObjective,
}

#[derive(Args)]
pub struct DatasetArgs {
    /// Input CSV path.
    #[arg(long)]
    pub input: PathBuf,
    /// Label column, by header name or 0-based index.
    #[arg(long)]
    pub label_col: Option<String>,
    /// Treat the first row as data, not a header.
    #[arg(long)]
    pub no_header: bool,
}

#[derive(Args)]
pub struct ReduceArgs {
    /// Dimensionality reduction applied before peeling.
    #[arg(long, value_enum, default_value_t = ReduceArg::Pca)]
    pub reduce: ReduceArg,
    /// Externally produced embedding (headerless CSV), for --reduce external.
    #[arg(long)]
    pub embedding: Option<PathBuf>,
    /// Target dimension for PCA.
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Skip feature standardization.
    #[arg(long)]
    pub no_standardize: bool,
}

#[derive(Args)]
pub struct StopArgs {
    /// Stopping strategy.
    #[arg(long, value_enum, default_value_t = StopArg::Naive)]
    pub stop: StopArg,
    /// Removal budget for --stop optimal; defaults to the labeled anomaly
    /// count when labels are present.
    #[arg(long)]
    pub k: Option<usize>,
    /// Naive-rule threshold as a fraction of the first volume drop.
    #[arg(long, default_value_t = 0.01)]
    pub naive_fraction: f64,
    /// Objective sensitivity weight (diagnostic only).
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// Smallest number of points allowed to remain.
    #[arg(long)]
    pub min_points: Option<usize>,
}

#[derive(Args)]
pub struct DetectArgs {
    #[command(flatten)]
    pub dataset: DatasetArgs,
    #[command(flatten)]
    pub reduce: ReduceArgs,
    #[command(flatten)]
    pub stop: StopArgs,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Report path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Optional CSV of per-point scores.
    #[arg(long)]
    pub scores_out: Option<PathBuf>,
}

#[derive(Args)]
pub struct BenchArgs {
    /// Input CSV paths (repeatable).
    #[arg(long, required = true)]
    pub input: Vec<PathBuf>,
    #[arg(long)]
    pub label_col: Option<String>,
    #[arg(long)]
    pub no_header: bool,
    /// Embedding for the external-reduction column; single input only.
    #[arg(long)]
    pub embedding: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long)]
    pub no_standardize: bool,
    #[arg(long, default_value_t = 0.01)]
    pub naive_fraction: f64,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// Isolation-forest contamination; defaults to the labeled anomaly
    /// fraction, falling back to 0.1 for unlabeled data.
    #[arg(long)]
    pub contamination: Option<f64>,
    #[arg(long, default_value_t = 100)]
    pub trees: usize,
    #[arg(long, default_value_t = 256)]
    pub subsample: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct SynthArgs {
    #[command(subcommand)]
    pub generator: Generator,
}

#[derive(Subcommand)]
pub enum Generator {
    /// Ring band with anomalies hidden at its center.
    Torus {
        #[arg(long, default_value_t = 500)]
        n_normal: usize,
        #[arg(long, default_value_t = 5)]
        n_anomaly: usize,
        #[arg(long, default_value_t = 2.0)]
        r_inner: f64,
        #[arg(long, default_value_t = 3.0)]
        r_outer: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Noisy circle with box-scattered anomalies.
    Circle {
        #[arg(long, default_value_t = 200)]
        n_normal: usize,
        #[arg(long, default_value_t = 10)]
        n_anomaly: usize,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 0.03)]
        noise_std: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Axis-stretched Gaussians with hull-interior anomalies.
    Unnormalized {
        #[arg(long, default_value_t = 500)]
        n_normal: usize,
        #[arg(long, default_value_t = 5)]
        n_anomaly: usize,
        #[arg(long, default_value_t = 100.0)]
        scale_x: f64,
        #[arg(long, default_value_t = 1.0)]
        scale_y: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fixed demo blob with two planted anomalies.
    SquareDemo {
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
pub struct NoiseSweepArgs {
    #[command(flatten)]
    pub dataset: DatasetArgs,
    #[command(flatten)]
    pub reduce: ReduceArgs,
    #[command(flatten)]
    pub stop: StopArgs,
    /// Comma-separated noise levels as fractions of per-feature variance.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.0, 0.01, 0.02, 0.03, 0.04, 0.05])]
    pub levels: Vec<f64>,
    /// Repetitions per level, averaged in the report.
    #[arg(long, default_value_t = 10)]
    pub reps: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A usage problem clap cannot express declaratively (exit 2) versus a
/// runtime failure (exit 1).
pub enum CliError {
    Usage(String),
    Runtime(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Runtime(e.into())
    }
}

fn main() -> ExitCode {
    hullpeel::parallelism::configure_global_pool();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Detect(args) => commands::detect(&args),
        Command::Bench(args) => commands::bench(&args),
        Command::Synth(args) => commands::synth(&args),
        Command::NoiseSweep(args) => commands::noise_sweep(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(message)) => {
            eprintln!("usage error: {message}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(error)) => {
            eprintln!("error: {error}");
            ExitCode::from(1)
        }
    }
}

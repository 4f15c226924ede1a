//! Batch front end: dataset generation, fitting, and scoring.
//!
//! Exit codes: 0 success, 2 flag or parameter errors, 3 I/O failures,
//! 4 algorithm failures (the message carries the library error name).

mod commands;
mod io;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or parameter values; exit 2.
    Usage(String),
    /// Unreadable or unwritable files; exit 3.
    Io(String),
    /// The algorithm itself failed; exit 4.
    Algorithm(unicluster_core::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
            CliError::Algorithm(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Io(msg) => write!(f, "{msg}"),
            CliError::Algorithm(e) => write!(f, "{e}"),
        }
    }
}

#[derive(Parser)]
#[command(name = "unicluster", version, about = "Clustering toolkit: generate, fit, score")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded synthetic dataset as CSV.
    Generate(GenerateArgs),
    /// Fit a clustering algorithm to a CSV dataset and report JSON.
    Fit(FitArgs),
    /// Score predicted labels against reference labels (AMI and ARI).
    Score(ScoreArgs),
}

#[derive(Args)]
pub struct GenerateArgs {
    /// Preset name: fig3, fig5, or circles.
    #[arg(long)]
    preset: String,
    /// Number of points; defaults to the preset's own size.
    #[arg(long)]
    n: Option<usize>,
    /// RNG seed; falls back to UNICLUSTER_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Gmm,
    Kmeans,
    Kkmeans,
    Sc,
    Dbscan,
    DbscanSpectral,
    DbscanClimb,
    Meanshift,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelKind {
    Linear,
    Gaussian,
    Polynomial,
}

#[derive(Args)]
pub struct FitArgs {
    /// Algorithm to run.
    #[arg(long, value_enum)]
    algo: Algo,
    /// Input CSV path; a `label` column, if present, is ignored.
    #[arg(long = "in")]
    input: PathBuf,
    /// Output JSON path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// RNG seed; falls back to UNICLUSTER_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of clusters (gmm, kmeans, kkmeans, sc).
    #[arg(long)]
    k: Option<usize>,
    /// Gaussian kernel width (sc, and kkmeans with --kernel gaussian).
    #[arg(long)]
    sigma: Option<f64>,
    /// Neighborhood radius (dbscan variants, meanshift).
    #[arg(long)]
    eps: Option<f64>,
    /// Core-point density threshold (dbscan variants).
    #[arg(long = "min-pts")]
    min_pts: Option<usize>,
    /// Kernel for kkmeans.
    #[arg(long, value_enum, default_value_t = KernelKind::Linear)]
    kernel: KernelKind,
    /// Polynomial kernel offset.
    #[arg(long = "poly-c", default_value_t = 1.0)]
    poly_c: f64,
    /// Polynomial kernel degree (>= 1).
    #[arg(long = "poly-b", default_value_t = 2.0)]
    poly_b: f64,
    /// Independent seeded restarts; the best run wins.
    #[arg(long, default_value_t = 1)]
    restarts: u64,
    /// Iteration cap for iterative algorithms.
    #[arg(long = "max-iters", default_value_t = 300)]
    max_iters: usize,
    /// Relative convergence tolerance.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Also write an `x<TAB>y<TAB>label` file for plotting tools.
    #[arg(long = "emit-plot-data")]
    emit_plot_data: Option<PathBuf>,
}

#[derive(Args)]
pub struct ScoreArgs {
    /// Predicted labels: a fit-report JSON or a CSV with a label column.
    #[arg(long)]
    pred: PathBuf,
    /// Reference labels: a fit-report JSON or a CSV with a label column.
    #[arg(long)]
    truth: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(args) => commands::generate(&args),
        Command::Fit(args) => commands::fit(&args),
        Command::Score(args) => commands::score(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

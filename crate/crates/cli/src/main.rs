//! `dmcount`: run DM-Count losses, Sinkhorn, smoothing, metrics and the toy
//! descent experiment from the command line.
//!
//! Exit codes: 0 success, 2 usage, 3 I/O, 4 numerical failure.

mod commands;
mod pgm;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "dmcount", version, about = "Distribution-matching losses for density-map counting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Descend one source map under the pixel-wise, Bayesian and DM-Count losses.
    Toy(ToyArgs),
    /// Entropic OT between two density maps (normalized on load).
    Sinkhorn(SinkhornArgs),
    /// Evaluate one loss and its gradient.
    Loss(LossArgs),
    /// Gaussian-smooth a dot annotation into a density map.
    Smooth(SmoothArgs),
    /// Count metrics from a pairs CSV, or PSNR/SSIM between two maps.
    Metrics(MetricsArgs),
    /// Finite-difference check of every loss gradient on seeded random inputs.
    Gradcheck(GradcheckArgs),
}

/// Weights and solver settings shared by every OT-based command.
#[derive(Args, Debug, Clone)]
struct OtArgs {
    /// Entropic regularization ε.
    #[arg(long, default_value_t = 10.0)]
    reg: f64,
    #[arg(long, default_value_t = 100)]
    sinkhorn_iters: usize,
    #[arg(long, default_value_t = 1e-9)]
    sinkhorn_tol: f64,
    /// Multiplier on squared pixel distances.
    #[arg(long, default_value_t = 1.0)]
    cost_scale: f64,
}

#[derive(Args, Debug, Clone)]
struct WeightArgs {
    #[arg(long, default_value_t = 0.1)]
    lambda1: f64,
    #[arg(long, default_value_t = 0.01)]
    lambda2: f64,
}

#[derive(Args, Debug)]
struct ToyArgs {
    #[arg(long, default_value_t = 64)]
    rows: usize,
    #[arg(long, default_value_t = 64)]
    cols: usize,
    /// Number of synthetic dots; ignored with --annotation.
    #[arg(long, default_value_t = 115)]
    dots: usize,
    /// Seed of the synthetic target.
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Seed of the shared initial map.
    #[arg(long, default_value_t = 0)]
    init_seed: u64,
    /// Use this `row,col` CSV as the target instead of a synthetic one.
    #[arg(long)]
    annotation: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-5)]
    eta: f64,
    #[arg(long, default_value_t = 200_000)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-9)]
    stop_tol: f64,
    /// Plateau window in iterations (multiple of 100).
    #[arg(long, default_value_t = 100)]
    window: usize,
    /// Kernel width of the pixel-wise baseline's smoothed target.
    #[arg(long, default_value_t = 8.0)]
    pixel_sigma: f64,
    #[arg(long, default_value_t = 8.0)]
    bayes_sigma: f64,
    #[command(flatten)]
    weights: WeightArgs,
    #[command(flatten)]
    ot: OtArgs,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SinkhornArgs {
    #[arg(long)]
    mu: PathBuf,
    #[arg(long)]
    nu: PathBuf,
    #[command(flatten)]
    ot: OtArgs,
    /// Also write the report here.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq)]
enum LossName {
    Count,
    Ot,
    Tv,
    DmCount,
    PixelwiseL2,
    PixelwiseL1,
    Bayesian,
}

#[derive(Args, Debug)]
struct LossArgs {
    #[arg(long, value_enum)]
    kind: LossName,
    /// Predicted density map.
    #[arg(long)]
    pred: PathBuf,
    /// Target density map (every loss except bayesian).
    #[arg(long)]
    target: Option<PathBuf>,
    /// Target `row,col` CSV (bayesian).
    #[arg(long)]
    annotation: Option<PathBuf>,
    #[arg(long, default_value_t = 8.0)]
    sigma: f64,
    #[command(flatten)]
    weights: WeightArgs,
    #[command(flatten)]
    ot: OtArgs,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SmoothArgs {
    #[arg(long)]
    annotation: PathBuf,
    #[arg(long)]
    rows: usize,
    #[arg(long)]
    cols: usize,
    /// Fixed kernel width.
    #[arg(long, default_value_t = 4.0)]
    sigma: f64,
    /// Geometry-adaptive widths instead of --sigma.
    #[arg(long)]
    adaptive: bool,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 0.3)]
    beta: f64,
    /// Density map output.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    pgm: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MetricsArgs {
    /// `truth,predicted` CSV for MAE/RMSE/NAE.
    #[arg(long, conflicts_with_all = ["a", "b"], required_unless_present_all = ["a", "b"])]
    pairs: Option<PathBuf>,
    #[arg(long, requires = "b")]
    a: Option<PathBuf>,
    #[arg(long, requires = "a")]
    b: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GradcheckArgs {
    #[arg(long, default_value_t = 6)]
    rows: usize,
    #[arg(long, default_value_t = 6)]
    cols: usize,
    #[arg(long, default_value_t = 20)]
    cases: usize,
    #[arg(long, default_value_t = 1e-4)]
    step: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    report: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(commands::EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match cli.command {
        Command::Toy(a) => commands::toy(a),
        Command::Sinkhorn(a) => commands::sinkhorn(a),
        Command::Loss(a) => commands::loss(a),
        Command::Smooth(a) => commands::smooth(a),
        Command::Metrics(a) => commands::metrics(a),
        Command::Gradcheck(a) => commands::gradcheck(a),
    };
    match outcome {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

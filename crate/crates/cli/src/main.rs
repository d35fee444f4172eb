//! `gsline`: refine and evaluate 3D line segments against Gaussian-splatting
//! point clouds.
//!
//! Exit codes: 0 success, 1 invalid input or configuration, 2 I/O failure.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "gsline", version, about = "Line segment refinement and evaluation on Gaussian-splatting point clouds")]
struct Cli {
    /// Worker threads for the parallel stages (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Refine a segment set against a point cloud.
    Refine(RefineArgs),
    /// Evaluate a segment set at one radius.
    Eval(EvalArgs),
    /// Evaluate a segment set over several radii.
    Sweep(SweepArgs),
    /// Generate a synthetic wireframe scene with planted defects.
    Synth(SynthArgs),
    /// Print summary statistics of a PLY cloud or a segment file.
    Inspect(InspectArgs),
}

#[derive(Args, Debug)]
struct ConfigArgs {
    /// `key = value` config file; absent keys keep their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one config key, applied after the config file (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// conjunction | paper-union
    #[arg(long)]
    overlap_semantics: Option<String>,
    /// aligned | paper
    #[arg(long)]
    similarity_branch: Option<String>,
}

#[derive(Args, Debug)]
struct CloudArgs {
    /// Gaussian-splatting PLY (ASCII or binary little-endian).
    #[arg(long)]
    ply: PathBuf,
    /// Keep this fraction of the PLY points, chosen with `--seed`.
    #[arg(long)]
    downsample: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct OutArgs {
    /// Output directory, created if missing.
    #[arg(long, env = "GSLINE_OUT", default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct RefineArgs {
    #[command(flatten)]
    cloud: CloudArgs,
    /// Input segments, one `ax ay az bx by bz` per line.
    #[arg(long)]
    segments: PathBuf,
    /// Working radius, meters (same as `--set working_radius=...`).
    #[arg(long)]
    radius: Option<f64>,
    #[command(flatten)]
    config: ConfigArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[command(flatten)]
    cloud: CloudArgs,
    #[arg(long)]
    segments: PathBuf,
    /// Segments whose padded bounds select the evaluated points (default:
    /// the evaluated segments). Use the same reference to compare runs.
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Evaluation radius, meters (same as `--set eval_radius=...`).
    #[arg(long)]
    radius: Option<f64>,
    /// File name stem of the reports.
    #[arg(long, default_value = "eval")]
    name: String,
    #[command(flatten)]
    config: ConfigArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    cloud: CloudArgs,
    #[arg(long)]
    segments: PathBuf,
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Comma-separated radii, meters (same as `--set radius_sweep=...`).
    #[arg(long, value_name = "A,B,C")]
    radii: Option<String>,
    #[arg(long, default_value = "sweep")]
    name: String,
    #[command(flatten)]
    config: ConfigArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
struct SynthArgs {
    /// cube | parallel
    #[arg(long, default_value = "cube")]
    scene: String,
    /// Cube side or parallel edge length, meters.
    #[arg(long, default_value_t = 1.0)]
    size: f64,
    /// Number of edges of the parallel scene.
    #[arg(long, default_value_t = 4)]
    edges: usize,
    /// Spacing of the parallel scene, meters.
    #[arg(long, default_value_t = 0.5)]
    spacing: f64,
    #[arg(long, default_value_t = 500.0)]
    points_per_meter: f64,
    #[arg(long, default_value_t = 0.005)]
    sigma: f64,
    #[arg(long, default_value_t = 0.0)]
    background: f64,
    #[arg(long, default_value_t = 0.0)]
    bias: f64,
    #[arg(long, default_value_t = 0.0)]
    overextension: f64,
    #[arg(long, default_value_t = 0)]
    outliers: usize,
    #[arg(long, default_value_t = 0.3)]
    outlier_length: f64,
    /// Outlier clearance from every edge (default: 5·sigma + 0.05).
    #[arg(long)]
    clearance: Option<f64>,
    #[arg(long, default_value_t = 0)]
    duplicates: usize,
    #[arg(long, default_value_t = 0.002)]
    jitter: f64,
    #[arg(long, default_value_t = 0)]
    cuts: usize,
    #[arg(long, default_value_t = 0.05)]
    gap: f64,
    /// ascii | binary
    #[arg(long, default_value = "binary")]
    ply_encoding: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct InspectArgs {
    #[arg(long)]
    ply: Option<PathBuf>,
    #[arg(long)]
    segments: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be >= 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure worker pool: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match cli.command {
        Command::Refine(a) => commands::refine(a),
        Command::Eval(a) => commands::eval(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Synth(a) => commands::synth(a),
        Command::Inspect(a) => commands::inspect(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

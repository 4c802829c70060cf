//! `bimlab`: generate datasets, simulate measurements, reconstruct and score.

mod commands;
mod error;
mod reconstruct;

use std::path::PathBuf;
use std::process::ExitCode;

use bimlab::Snr;
use clap::{Args, Parser, Subcommand, ValueEnum};

use error::{CliError, CliResult};

/// Thread count from the environment; wins over `--jobs`.
const THREADS_ENV: &str = "BIMLAB_THREADS";

#[derive(Debug, Parser)]
#[command(name = "bimlab", version, about = "Born iterative microwave imaging toolkit")]
struct Cli {
    /// Worker threads for per-example parallelism (BIMLAB_THREADS overrides).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a train/valid/test dataset of random cylinder scenes.
    Generate(GenerateArgs),
    /// Simulate the scattered field of one scene.
    Forward(ForwardArgs),
    /// Reconstruct contrasts for a dataset split.
    Reconstruct(ReconstructArgs),
    /// Recompute RNE/MRNE from stored reconstructions.
    Evaluate(EvaluateArgs),
    /// Compare network outputs with stored reference vectors.
    ParityCheck(ParityArgs),
}

#[derive(Debug, Args)]
struct GenerateArgs {
    /// Output directory; one subdirectory per split.
    out: PathBuf,
    /// Problem configuration (JSON); defaults to the built-in configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 4000)]
    train: usize,
    #[arg(long, default_value_t = 200)]
    valid: usize,
    #[arg(long, default_value_t = 200)]
    test: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Smallest target radius in metres [default: 2 pixels].
    #[arg(long)]
    r_min: Option<f64>,
    /// Largest target radius in metres [default: 8 pixels].
    #[arg(long)]
    r_max: Option<f64>,
}

#[derive(Debug, Args)]
struct ForwardArgs {
    /// Scene description (JSON with a `cylinders` list).
    scene: PathBuf,
    /// Output directory.
    out: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "noiseless", value_parser = parse_snr)]
    snr: Snr,
    /// Noise seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Sbim,
    Tbim,
    LandweberBim,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Sbim => "sbim",
            Method::Tbim => "tbim",
            Method::LandweberBim => "landweber-bim",
        }
    }
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    #[arg(value_enum)]
    pub method: Method,
    /// Dataset root produced by `generate`.
    pub dataset: PathBuf,
    /// Output directory.
    pub out: PathBuf,
    #[arg(long, default_value = "test")]
    pub split: bimlab::dataset::Split,
    /// Noise condition; repeat for several.
    #[arg(long = "snr", value_parser = parse_snr, default_value = "noiseless")]
    pub snrs: Vec<Snr>,
    /// Per-step network bundles (required for tbim).
    #[arg(long)]
    pub weights: Option<PathBuf>,
    /// Only the first k examples of the split.
    #[arg(long)]
    pub examples: Option<usize>,
    /// Noise seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Output directory of `reconstruct`.
    pub results: PathBuf,
    /// Dataset root the results were computed from.
    pub dataset: PathBuf,
    /// Where to write the JSON report [default: RESULTS/evaluation.json].
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ParityArgs {
    /// A single weight bundle or a bundle set with `meta.json`.
    weights: PathBuf,
    /// Directory with `inputs.bin`, `outputs.bin` and `manifest.json`.
    vectors: PathBuf,
    /// Which step of a bundle set to check.
    #[arg(long, default_value_t = 1)]
    step: usize,
    #[arg(long, default_value_t = 1e-4)]
    tolerance: f64,
}

fn parse_snr(s: &str) -> Result<Snr, String> {
    s.parse().map_err(|e: bimlab::Error| e.to_string())
}

fn thread_count(jobs: Option<usize>) -> CliResult<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(value) => value
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got `{value}`"))),
        Err(_) => match jobs {
            Some(0) => Err(CliError::Usage("--jobs must be at least 1".into())),
            other => Ok(other),
        },
    }
}

fn run(cli: Cli) -> CliResult {
    if let Some(n) = thread_count(cli.jobs)? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot start {n} worker threads: {e}")))?;
    }
    match cli.command {
        Command::Generate(a) => commands::generate(
            a.config.as_deref(),
            bimlab::dataset::DatasetSizes {
                train: a.train,
                valid: a.valid,
                test: a.test,
            },
            a.seed,
            a.r_min,
            a.r_max,
            &a.out,
        ),
        Command::Forward(a) => commands::forward(a.config.as_deref(), &a.scene, a.snr, a.seed, &a.out),
        Command::Reconstruct(a) => reconstruct::reconstruct(&a),
        Command::Evaluate(a) => reconstruct::evaluate(&a),
        Command::ParityCheck(a) => commands::parity_check(&a.weights, &a.vectors, a.step, a.tolerance),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bimlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

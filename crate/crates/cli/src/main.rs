mod commands;
mod config;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::{parse_range, ExperimentConfig};

/// Coherence analysis, sparsity-condition checks, and Monte Carlo experiments
/// for dictionaries split into an arbitrary-support block and a random-support block.
#[derive(Debug, Parser)]
#[command(name = "hybridcs", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON experiment configuration; flags override its fields.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Worker threads for the parallel parts of an experiment.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    /// Print machine-readable JSON instead of tables.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a dictionary and write it as `.dict.json`.
    BuildDict(BuildDictArgs),
    /// Coherence, norms and scaling ratios of a dictionary.
    Analyze(AnalyzeArgs),
    /// Evaluate the sparsity conditions; exit code 3 when any fails.
    Check(CheckArgs),
    /// Smallest singular value of random sub-dictionaries.
    Smin(SminArgs),
    /// Moment estimates of the block norms against their bounds.
    Moments(MomentsArgs),
    /// Basis-pursuit recovery trials or a phase-transition sweep.
    Recover(RecoverArgs),
    /// Full analysis bundle (JSON, Markdown, SVG) for one dictionary.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// Dictionary file (`.dict.json`).
    #[arg(long, value_name = "PATH")]
    dict: Option<PathBuf>,
    /// Override the number of columns in the A block.
    #[arg(long, value_name = "NA")]
    split: Option<usize>,
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    #[arg(long, value_name = "N")]
    trials: Option<usize>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BuildDictArgs {
    /// Identity plus the chirp bases over Z_p (p an odd prime): m = p, N = p(p+1).
    #[arg(long, value_name = "P", group = "builder")]
    mub: Option<usize>,
    /// Identity plus the unitary DFT: N = 2m.
    #[arg(long = "two-onb", value_name = "M", group = "builder")]
    two_onb: Option<usize>,
    /// Gaussian columns, normalized.
    #[arg(long, num_args = 2, value_names = ["M", "N"], group = "builder")]
    random: Option<Vec<usize>>,
    #[arg(long, value_name = "NA")]
    split: Option<usize>,
    /// Seed for `--random`.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    #[arg(short = 'o', long, value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct CheckArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    na: Option<usize>,
    #[arg(long)]
    nb: Option<usize>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Search for the largest (nA, nB) over the gamma grid.
    #[arg(long)]
    maximize: bool,
    #[arg(long, value_name = "N")]
    na_max: Option<usize>,
    #[arg(long, value_name = "N")]
    nb_max: Option<usize>,
    /// 1: uniform-support conditions, 2: hybrid conditions.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
    theorem: u8,
    /// Coefficient magnitude law the check is meant for.
    #[arg(long)]
    magnitude: Option<String>,
}

#[derive(Debug, Args)]
struct SminArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    na: Option<usize>,
    #[arg(long)]
    nb: Option<usize>,
    #[arg(long)]
    s: Option<f64>,
    /// first-n | spread | random[:SEED] | prescribed:I;J;...
    #[arg(long)]
    strategy: Option<String>,
}

#[derive(Debug, Args)]
struct MomentsArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    na: Option<usize>,
    #[arg(long)]
    nb: Option<usize>,
    /// Moment order; repeat for several.
    #[arg(long)]
    q: Vec<f64>,
}

#[derive(Debug, Args)]
struct RecoverArgs {
    #[command(flatten)]
    common: Common,
    /// Sweep a grid of (nA, nB) instead of a single cell.
    #[arg(long)]
    sweep: bool,
    #[arg(long)]
    na: Option<usize>,
    #[arg(long)]
    nb: Option<usize>,
    #[arg(long, value_name = "LO:HI", value_parser = parse_range)]
    na_range: Option<[usize; 2]>,
    #[arg(long, value_name = "LO:HI", value_parser = parse_range)]
    nb_range: Option<[usize; 2]>,
    /// Support strategy on A; repeat to compare several in a sweep.
    #[arg(long)]
    strategy: Vec<String>,
    /// unit | half-normal-modulus | uniform
    #[arg(long)]
    magnitude: Option<String>,
    #[arg(long)]
    max_iterations: Option<usize>,
    /// Primal and dual tolerance of the solver.
    #[arg(long)]
    tolerance: Option<f64>,
}

#[derive(Debug, Args)]
struct ReportArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    s: Option<f64>,
}

const EXIT_USAGE: u8 = 2;
const EXIT_NUMERICAL: u8 = 4;

fn exit_code_for(err: &anyhow::Error) -> u8 {
    match err.chain().find_map(|e| e.downcast_ref::<hybridcs::Error>()) {
        Some(hybridcs::Error::Numerical(_)) => EXIT_NUMERICAL,
        _ => EXIT_USAGE,
    }
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    let cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(n) = cli.threads.or(cfg.threads) {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let ctx = commands::Ctx { cfg, json: cli.json };
    match cli.command {
        Command::BuildDict(a) => commands::build_dict(&ctx, a),
        Command::Analyze(a) => commands::analyze(&ctx, a),
        Command::Check(a) => commands::check(&ctx, a),
        Command::Smin(a) => commands::smin(&ctx, a),
        Command::Moments(a) => commands::moments(&ctx, a),
        Command::Recover(a) => commands::recover(&ctx, a),
        Command::Report(a) => commands::report(&ctx, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

//! Command-line driver. Exit codes: 0 success, 1 usage or configuration
//! error, 2 finished with per-instance failures.

mod commands;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::ReducedRecord;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_PARTIAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "mfscope",
    version,
    about = "Observation reduction, MFS mining and coverage evaluation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Provider backend: `fake` (offline) or `openai` (reads MFSCOPE_* variables).
    #[arg(long, global = true, default_value = "fake")]
    pub provider: String,
    /// Worker threads; defaults to the CPU count.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Reduce every observation with one or more methods.
    Reduce(ReduceArgs),
    /// Minimize candidate sets into an MFS dataset.
    Mine(MineArgs),
    /// Coverage, reduction ratio and optional correlation with external scores.
    Eval(EvalArgs),
    /// Coverage drop when one element type is removed from reduced outputs.
    Ablate(AblateArgs),
    /// Compare FPS and random partitioning on synthetic instances.
    Simulate(SimulateArgs),
    /// Print the method table of an eval report.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct MethodArgs {
    /// Method spec, `id[:k=..,seed=..,program=..,weights=..]`; repeatable.
    #[arg(long = "method", required = true)]
    pub methods: Vec<String>,
    /// Default k for methods that need one.
    #[arg(long)]
    pub k: Option<usize>,
    /// Default GEPA program.
    #[arg(long)]
    pub program: Option<String>,
    /// Default seed for the random method.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ReduceArgs {
    /// Observations, one JSON record per line.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub method: MethodArgs,
    #[arg(long)]
    pub out: PathBuf,
    /// Leave `wall_time` out so that reruns are byte-identical.
    #[arg(long)]
    pub no_timings: bool,
}

#[derive(Debug, Args)]
pub struct MineArgs {
    /// Candidate sets, one JSON record per line.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_parser = ["simulation", "proxy"], default_value = "simulation")]
    pub oracle: String,
    #[arg(long, value_parser = ["fps", "random"], default_value = "fps")]
    pub partitioner: String,
    /// Seed for random partitioning.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Add retrieval hits and action-target neighbors to each candidate set.
    #[arg(long)]
    pub expand: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// MFS dataset, one JSON record per line.
    #[arg(long)]
    pub mfs: PathBuf,
    #[command(flatten)]
    pub method: MethodArgs,
    /// JSON object mapping method id to an external success rate.
    #[arg(long)]
    pub scores: Option<PathBuf>,
    /// Also compute subsampled rank correlation on this many instances.
    #[arg(long)]
    pub subsample: Option<usize>,
    /// Subsampling draws.
    #[arg(long, default_value_t = 5)]
    pub trials: usize,
    /// Report path; a `.csv` table is written next to it.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AblateArgs {
    #[arg(long)]
    pub mfs: PathBuf,
    /// Method spec; defaults to the unreduced observation.
    #[arg(long, default_value = "original")]
    pub method: String,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub program: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// `TEXT`, `tag:<name>` or `attr:<name>`; repeatable.
    #[arg(long = "target", required = true)]
    pub targets: Vec<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 4)]
    pub regions: usize,
    #[arg(long, default_value_t = 3)]
    pub fanout: usize,
    #[arg(long, default_value_t = 2)]
    pub depth: usize,
    #[arg(long, default_value_t = 2)]
    pub wrap: usize,
    /// Units per planted failing group.
    #[arg(long, default_value_t = 2)]
    pub mfs_size: usize,
    /// Planted failing groups.
    #[arg(long, default_value_t = 2)]
    pub groups: usize,
    /// Candidate units per instance.
    #[arg(long, default_value_t = 12)]
    pub candidates: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Report written by `eval`.
    #[arg(long)]
    pub input: PathBuf,
    /// Also write the table as CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match commands::dispatch(cli) {
        Ok(0) => EXIT_OK,
        Ok(n) => {
            eprintln!("finished with {n} failed instance(s)");
            EXIT_PARTIAL
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}

//! `hcct`: generate call traces, mine hot calling contexts, compare against
//! the exact tree and export the results.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use hcct::Fraction;

#[derive(Debug, Parser)]
#[command(name = "hcct", version, about = "Hot calling context tree mining over call/return traces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic trace.
    Gen(GenArgs),
    /// Build the exact calling context tree (or its hot subtree).
    Exact(ExactArgs),
    /// Stream a trace through the bounded-space builder.
    Mine(MineArgs),
    /// Check a streaming run against the exact tree.
    Compare(CompareArgs),
    /// Convert a JSON-lines tree dump to another format.
    Export(ExportArgs),
    /// Trace statistics and context skew.
    Stats(StatsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Dot,
    Folded,
    JsonLines,
    Report,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file; standard output when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Routine names, one `<id> <name>` per line.
    #[arg(long)]
    symbols: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Number of distinct routines.
    #[arg(long, default_value_t = 100)]
    routines: u32,
    /// Maximum call stack depth.
    #[arg(long, default_value_t = 8)]
    depth: usize,
    /// Total number of calls in the trace.
    #[arg(long, default_value_t = 100_000)]
    calls: u64,
    /// Zipf exponent of context popularity.
    #[arg(long, default_value_t = 1.0)]
    skew: f64,
    /// Number of candidate call paths to sample from.
    #[arg(long, default_value_t = hcct::ZipfWorkloadSpec::DEFAULT_CONTEXTS)]
    contexts: usize,
    /// Random seed; equal seeds give identical traces.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Emit the main/p/q example trace with this many calls instead.
    #[arg(long, value_name = "N", conflicts_with_all = ["routines", "depth", "calls", "skew", "contexts", "seed"])]
    example: Option<u64>,
    /// Also write the example's routine names here.
    #[arg(long, requires = "example")]
    symbols_out: Option<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    /// Lift a zero `floor(phi * N)` threshold to one.
    #[arg(long, default_value_t = true, action = ArgAction::Set, value_name = "BOOL")]
    min_threshold_one: bool,
}

#[derive(Debug, Args)]
pub struct ExactArgs {
    /// Trace file, or `-` for standard input.
    trace: PathBuf,
    /// Hotness threshold; 0 exports the full tree.
    #[arg(long, default_value = "0")]
    phi: Fraction,
    #[arg(long, value_enum, default_value_t = Format::Report)]
    format: Format,
    #[command(flatten)]
    out: OutputArgs,
    #[command(flatten)]
    threshold: ThresholdArgs,
}

#[derive(Debug, Args)]
pub struct StreamArgs {
    /// Trace file, or `-` for standard input.
    trace: PathBuf,
    /// Hotness threshold, as a fraction (`1/100`) or decimal (`0.01`).
    #[arg(long)]
    phi: Fraction,
    /// Counter error bound; must be below `phi`.
    #[arg(long = "eps")]
    epsilon: Fraction,
    /// Override the `ceil(1/eps)` monitor slots.
    #[arg(long)]
    pool_capacity: Option<usize>,
    #[command(flatten)]
    threshold: ThresholdArgs,
}

#[derive(Debug, Args)]
pub struct MineArgs {
    #[command(flatten)]
    stream: StreamArgs,
    /// Prune the tree in place at end of stream instead of snapshotting.
    #[arg(long = "final")]
    finalize: bool,
    #[arg(long, value_enum, default_value_t = Format::Report)]
    format: Format,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CompareFormat {
    Report,
    Json,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    stream: StreamArgs,
    #[arg(long, value_enum, default_value_t = CompareFormat::Report)]
    format: CompareFormat,
    /// Output file; standard output when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    /// JSON-lines tree written by `exact` or `mine`.
    input: PathBuf,
    #[arg(long, value_enum)]
    format: Format,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Trace file, or `-` for standard input.
    trace: PathBuf,
    /// Print every point of the skew curve.
    #[arg(long)]
    curve: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(args) => commands::gen(args),
        Command::Exact(args) => commands::exact(args),
        Command::Mine(args) => commands::mine(args),
        Command::Compare(args) => commands::compare(args),
        Command::Export(args) => commands::export(args),
        Command::Stats(args) => commands::stats(args),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("hcct: {err:#}");
            match err.downcast_ref::<hcct::Error>() {
                Some(hcct::Error::InvalidSpec(_) | hcct::Error::InvalidThreshold { .. }) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}

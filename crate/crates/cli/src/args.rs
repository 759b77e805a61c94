use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "cubisect", version, about = "Bisection of random cubic graphs: heuristics, exact solver and bound calculators")]
pub struct Cli {
    /// Master seed; subsystems derive their own streams from it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Worker thread cap (defaults to all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// TOML config file; command-line flags take precedence over it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Also write the run record (command, params, seed, outputs, wall time) as JSON.
    #[arg(long, global = true)]
    pub record: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a cubic multigraph from the configuration model.
    Gen(GenArgs),
    /// Bisect a graph from an edge-list file.
    Bisect(BisectArgs),
    /// Sweep sizes and seeds, write a CSV.
    Bench(BenchArgs),
    /// Cherry, 2-core and short-cycle diagnostics.
    Stats(StatsArgs),
    /// First-moment bound calculators and the constant chain.
    #[command(subcommand)]
    Bounds(BoundsCommand),
    /// Monte Carlo estimators.
    #[command(subcommand)]
    Mc(McCommand),
    /// Exact minimum bisection (n <= 28).
    Exact(ExactArgs),
    /// Re-run a recorded command and compare its outputs.
    Replay(ReplayArgs),
}

#[derive(Debug, Subcommand)]
pub enum BoundsCommand {
    EvalType1(EvalType1Args),
    OptType1(OptType1Args),
    EvalType2(EvalType2Args),
    OptType2(OptType2Args),
    Report(ReportArgs),
    /// Zero level set of the type-one exponent as CSV.
    Type1Curve(Type1CurveArgs),
}

#[derive(Debug, Subcommand)]
pub enum McCommand {
    /// Probability of the seven-vertex isolated-center configuration.
    Orthant(OrthantArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Wave,
    Exact,
    Local,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Wave => "wave",
            Method::Exact => "exact",
            Method::Local => "local",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Init {
    Random,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenArgs {
    #[arg(long)]
    pub n: Option<usize>,
    /// Resample until the graph has no loops or parallel edges.
    #[arg(long)]
    pub simple: bool,
    #[arg(long, default_value_t = 10_000)]
    pub max_attempts: usize,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BisectArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Method::Wave)]
    pub method: Method,
    #[arg(long, default_value_t = cubic_bisect::wave::LAMBDA_DEFAULT, allow_hyphen_values = true)]
    pub lambda: f64,
    /// Field radius; `max(2, floor(ln ln n))` when absent.
    #[arg(long)]
    pub radius: Option<usize>,
    #[arg(long, default_value_t = 8)]
    pub max_set_size: usize,
    #[arg(long, default_value_t = 10_000)]
    pub max_rounds: usize,
    /// Starting bisection for the local method.
    #[arg(long, value_enum, default_value_t = Init::Random)]
    pub init: Init,
    /// Include per-stage crossing and balance.
    #[arg(long)]
    pub stage_trace: bool,
    /// Include the per-round local search trace.
    #[arg(long)]
    pub round_trace: bool,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchArgs {
    /// Comma-separated vertex counts.
    #[arg(long = "n", value_delimiter = ',')]
    pub n: Vec<usize>,
    /// Instances per size.
    #[arg(long, default_value_t = 10)]
    pub seeds: usize,
    #[arg(long, value_enum, default_value_t = Method::Wave)]
    pub method: Method,
    #[arg(long, default_value_t = cubic_bisect::wave::LAMBDA_DEFAULT, allow_hyphen_values = true)]
    pub lambda: f64,
    #[arg(long)]
    pub radius: Option<usize>,
    #[arg(long, default_value_t = 8)]
    pub max_set_size: usize,
    #[arg(long, default_value_t = 10_000)]
    pub max_rounds: usize,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatsArgs {
    /// Edge-list file; a fresh sample of `--n` vertices when absent.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Longest cycle counted as short.
    #[arg(long, default_value_t = 20)]
    pub cycle_len: usize,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExactArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Include an optimal bisection.
    #[arg(long)]
    pub emit_witness: bool,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalType1Args {
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(id = "T", long = "T")]
    #[serde(rename = "T")]
    pub t: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptType1Args {
    /// `lo,hi` range of beta'.
    #[arg(long, value_delimiter = ',', default_values_t = [0.10, 0.1069])]
    pub range: Vec<f64>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalType2Args {
    #[arg(long)]
    pub beta1: Option<f64>,
    /// Defaults to `--beta1`.
    #[arg(long)]
    pub beta2: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lam1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lam3: Option<f64>,
    /// Second side multipliers; default to the first side's.
    #[arg(long, allow_hyphen_values = true)]
    pub lam1b: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lam3b: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptType2Args {
    #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.103295])]
    pub range: Vec<f64>,
    /// Restrict to beta1 = beta2.
    #[arg(long)]
    pub diagonal: bool,
    /// Share the multipliers between both sides.
    #[arg(long)]
    pub shared: bool,
    #[arg(long, default_value_t = 5)]
    pub beta_grid: usize,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportArgs {
    /// Omit the Monte Carlo section.
    #[arg(long)]
    pub skip_mc: bool,
    #[arg(long, default_value_t = 30_000_000)]
    pub samples: u64,
    /// JSON instead of text.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Type1CurveArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.125])]
    pub range: Vec<f64>,
    #[arg(long, default_value_t = 50)]
    pub steps: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrthantArgs {
    #[arg(long, default_value_t = 10_000_000)]
    pub samples: u64,
    /// Number of independently seeded blocks; 65536 samples per block when absent.
    #[arg(long)]
    pub blocks: Option<u64>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReplayArgs {
    /// Run record written by `--record`.
    pub file: PathBuf,
}

impl Command {
    /// Space-separated command path and the leaf arguments as JSON.
    pub fn leaf(&self) -> (String, serde_json::Value) {
        fn v<T: Serialize>(name: &str, a: &T) -> (String, serde_json::Value) {
            (name.to_string(), serde_json::to_value(a).expect("arguments serialize"))
        }
        match self {
            Command::Gen(a) => v("gen", a),
            Command::Bisect(a) => v("bisect", a),
            Command::Bench(a) => v("bench", a),
            Command::Stats(a) => v("stats", a),
            Command::Exact(a) => v("exact", a),
            Command::Replay(a) => v("replay", a),
            Command::Mc(McCommand::Orthant(a)) => v("mc orthant", a),
            Command::Bounds(b) => match b {
                BoundsCommand::EvalType1(a) => v("bounds eval-type1", a),
                BoundsCommand::OptType1(a) => v("bounds opt-type1", a),
                BoundsCommand::EvalType2(a) => v("bounds eval-type2", a),
                BoundsCommand::OptType2(a) => v("bounds opt-type2", a),
                BoundsCommand::Report(a) => v("bounds report", a),
                BoundsCommand::Type1Curve(a) => v("bounds type1-curve", a),
            },
        }
    }
}

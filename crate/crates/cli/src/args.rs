use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use subset_aic::bnb::SearchOrder;
use subset_aic::cardinality::SweepMode;
use subset_aic::stepwise::Direction;
use subset_aic::BranchingRule;

#[derive(Debug, Parser)]
#[command(
    name = "subset-aic",
    version,
    about = "Exact AIC-optimal subset selection for linear regression"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Find an AIC-optimal subset by branch-and-bound.
    Solve(SolveArgs),
    /// Forward selection or backward elimination.
    Stepwise(StepwiseArgs),
    /// Sweep over subset sizes.
    Cardinality(CardinalityArgs),
    /// Evaluate every subset.
    Enumerate(EnumerateArgs),
    /// Run datasets from a manifest under several branching rules.
    Bench(BenchArgs),
    /// Write a synthetic regression dataset as CSV.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// CSV file with a header row.
    pub csv: PathBuf,
    /// Response column: a header name or a 0-based index. Defaults to the last column.
    #[arg(long)]
    pub response: Option<String>,
    /// Use the data as given instead of standardizing every column.
    #[arg(long)]
    pub raw: bool,
    /// Label for report rows. Defaults to the file stem.
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Rule {
    Auto,
    Std,
    Mfb,
    Sb,
}

impl From<Rule> for BranchingRule {
    fn from(r: Rule) -> Self {
        match r {
            Rule::Auto => BranchingRule::Auto,
            Rule::Std => BranchingRule::Std,
            Rule::Mfb => BranchingRule::Mfb,
            Rule::Sb => BranchingRule::Sb,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Order {
    BestFirst,
    DepthFirst,
}

impl From<Order> for SearchOrder {
    fn from(o: Order) -> Self {
        match o {
            Order::BestFirst => SearchOrder::BestFirst,
            Order::DepthFirst => SearchOrder::DepthFirst,
        }
    }
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    #[arg(long, value_enum, default_value = "auto")]
    pub branching: Rule,
    /// Stored solutions consulted by most-frequent branching.
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u16).range(1..=100))]
    pub pool_size: u16,
    /// Deepest node that runs the stepwise bound; negative disables it.
    #[arg(long, default_value_t = 10, allow_negative_numbers = true)]
    pub stepwise_depth: i64,
    /// Seconds.
    #[arg(long, default_value_t = 5000.0)]
    pub time_limit: f64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub node_limit: Option<u64>,
    #[arg(long, value_enum, default_value = "best-first")]
    pub order: Order,
    /// Use strong branching only at nodes with at most this many free variables.
    #[arg(long)]
    pub strong_cap: Option<usize>,
    /// Also run a per-node rank check for collinear columns.
    #[arg(long)]
    pub dynamic_dependency_check: bool,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Write the JSON report here; `-` for stdout.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Write one JSON line per visited node here.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Cross-check the answer by exhaustive enumeration.
    #[arg(long)]
    pub enumerate_check: bool,
    /// Largest p allowed for --enumerate-check.
    #[arg(long, default_value_t = 20)]
    pub enumeration_cap: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DirectionArg {
    Forward,
    Backward,
}

impl From<DirectionArg> for Direction {
    fn from(d: DirectionArg) -> Self {
        match d {
            DirectionArg::Forward => Direction::Forward,
            DirectionArg::Backward => Direction::Backward,
        }
    }
}

#[derive(Debug, Args)]
pub struct StepwiseArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum, default_value = "forward")]
    pub direction: DirectionArg,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Naive,
    FastEq,
    FastLe,
}

impl From<ModeArg> for SweepMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Naive => SweepMode::Naive,
            ModeArg::FastEq => SweepMode::FastEq,
            ModeArg::FastLe => SweepMode::FastLe,
        }
    }
}

#[derive(Debug, Args)]
pub struct CardinalityArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum, default_value = "fast-eq")]
    pub mode: ModeArg,
    /// Start the fast sweep's upper bound from forward stepwise.
    #[arg(long)]
    pub seed_stepwise: bool,
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Write the per-size table as CSV.
    #[arg(long)]
    pub table: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EnumerateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Write every subset's row as CSV.
    #[arg(long)]
    pub full_table: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    pub cap: usize,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// TOML manifest with `[[dataset]]` entries.
    pub manifest: PathBuf,
    /// Comma-separated rules; overrides the manifest.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub rules: Option<Vec<Rule>>,
    /// Seconds per dataset and rule; overrides the manifest.
    #[arg(long)]
    pub time_limit: Option<f64>,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub p: usize,
    /// Columns replaced by exact combinations of two others.
    #[arg(long, default_value_t = 0)]
    pub dependencies: usize,
    /// Sizes of one-hot groups, comma-separated; counted in p.
    #[arg(long, value_delimiter = ',')]
    pub one_hot: Vec<usize>,
    /// Predictors with a nonzero true coefficient. Defaults to half of p.
    #[arg(long)]
    pub active: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output path; stdout when omitted.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

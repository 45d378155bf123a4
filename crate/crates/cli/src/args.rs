use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

/// Risk, threshold, dominance and verification runs for predictive density
/// estimation in normal and scale-mixture-of-normal models.
#[derive(Debug, Parser)]
#[command(name = "predens", version, about)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Master seed for every randomized computation; generated and printed when omitted.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Number of worker threads.
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: Option<u16>,
    /// Output format (defaults to the config file's choice, then json).
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutFormat>,
    /// Write results here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutFormat {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo and closed-form risks of every estimator in a scenario file.
    Risk(ConfigArgs),
    /// Expansion cutoffs k(p, r) or k_a(p, r) over a grid.
    Threshold(ThresholdArgs),
    /// Paired 3-SE dominance scan of the first estimator against the second.
    Dominance(ConfigArgs),
    /// Integrated L1 or L2 distance between two normal or Student densities.
    Distance(DistanceArgs),
    /// Caps on the Baranchik multiplier.
    Bounds(BoundsArgs),
    /// Run an acceptance suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// Scenario file (JSON).
    #[arg(long)]
    pub config: PathBuf,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    /// Dimensions, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub p: Vec<usize>,
    /// Variance ratios σ_X²/σ_Y², comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub r: Vec<f64>,
    /// Shrink factors a of the location a·X; omit for a = 1.
    #[arg(long, value_delimiter = ',')]
    pub a: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DistanceLoss {
    L1,
    L2,
}

#[derive(Debug, Args)]
pub struct DistanceArgs {
    #[arg(long, value_enum, default_value = "l2")]
    pub loss: DistanceLoss,
    #[arg(long, default_value_t = 1)]
    pub p: usize,
    /// Distance between the two centres, placed along the first axis.
    #[arg(long)]
    pub delta: f64,
    /// Scale² of the first density (variance for normals).
    #[arg(long, default_value_t = 1.0)]
    pub v1: f64,
    /// Scale² of the second density; L1 requires it to equal v1.
    #[arg(long)]
    pub v2: Option<f64>,
    /// Use Student t densities with this many degrees of freedom.
    #[arg(long)]
    pub nu: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundKind {
    /// Closed-form caps in the normal model.
    Normal,
    /// L2 cap for the MRE density from the dual mixing law.
    L2Dual,
    /// L1 cap for the plug-in density from the dual mixing law.
    L1Dual,
    /// L1 cap by quadrature over the radial densities.
    L1General,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long, value_enum)]
    pub kind: BoundKind,
    #[arg(long)]
    pub p: usize,
    #[arg(long, default_value_t = 1.0)]
    pub sx2: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sy2: f64,
    /// Mixing law of X as JSON, e.g. '{"kind":"gamma","shape":3,"scale":1}'.
    #[arg(long)]
    pub g: Option<String>,
    /// Mixing law of Y as JSON.
    #[arg(long)]
    pub h: Option<String>,
    /// Importance-sampling draws.
    #[arg(long, default_value_t = 1_000_000)]
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    Identities,
    Thresholds,
    Dominance,
    Bounds,
    All,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub suite: SuiteArg,
}

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "weylab",
    version,
    about = "Weyl sums, mean values and fractional parts of polynomials"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Enumeration budget; also sets the box budget.
    #[arg(long, global = true)]
    pub budget: Option<String>,
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    /// Write JSON records here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// sigma(k), D, L and variable-count thresholds of a profile.
    Sigma {
        #[arg(long)]
        profile: String,
    },
    /// Evaluate an exponential sum.
    Sum(SumArgs),
    /// Classify a coefficient against the major arcs, or describe the arcs.
    Arcs(ArcsArgs),
    /// Count solutions or integrate over arcs.
    Meanvalue(MeanvalueArgs),
    /// Minimize the fractional part of a polynomial system.
    Minfrac(MinfracArgs),
    /// Run the acceptance suite.
    Verify {
        #[arg(long, value_enum, default_value = "fast")]
        suite: SuiteArg,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SuiteArg {
    Fast,
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SumKind {
    /// sum_{x<=X} e(phase(x))
    Weyl,
    /// sum_{z<=X} e(-gamma z)
    K,
    /// max over subintervals of |sum e(phase(x))|
    Sup,
}

#[derive(Debug, Args)]
pub struct SumArgs {
    /// Terms `j:alpha`, comma separated, e.g. `3:sqrt2,1:1/3`.
    #[arg(long, default_value = "")]
    pub phase: String,
    #[arg(short = 'X', long = "x")]
    pub x: u64,
    #[arg(long, value_enum, default_value = "weyl")]
    pub kind: SumKind,
    #[arg(long, default_value = "0")]
    pub gamma: String,
}

#[derive(Debug, Args)]
pub struct ArcsArgs {
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(short = 'X', long = "x")]
    pub x: u64,
    #[arg(short = 'k', long)]
    pub k: u32,
    #[arg(long, conflicts_with = "h")]
    pub l: Option<u64>,
    #[arg(short = 'H', long = "H")]
    pub h: Option<f64>,
    /// Include every interval of the arc set in the JSON record.
    #[arg(long)]
    pub intervals: bool,
    /// Write the arc set as CSV (lo,hi,q,a).
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ArcsChoice {
    Full,
    Major,
    Minor,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SystemChoice {
    /// A one-exponent profile `k` means the full system `1..=k`; otherwise the profile itself.
    Auto,
    Profile,
    Vinogradov,
}

#[derive(Debug, Args)]
pub struct MeanvalueArgs {
    #[arg(long)]
    pub profile: String,
    #[arg(short = 's', long)]
    pub s: u64,
    /// One value or a comma-separated grid.
    #[arg(short = 'X', long = "x")]
    pub x: String,
    #[arg(long, value_enum, default_value = "full")]
    pub arcs: ArcsChoice,
    #[arg(long, default_value_t = 2)]
    pub l: u64,
    #[arg(long, default_value = "hashed")]
    pub backend: String,
    #[arg(long, value_enum, default_value = "auto")]
    pub system: SystemChoice,
    /// Write the distribution c_d as CSV; `_X<x>` is appended to the stem for grids.
    #[arg(long)]
    pub dist_csv: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Strict,
    Proxy,
}

#[derive(Debug, Args)]
pub struct MinfracArgs {
    #[arg(long)]
    pub profile: String,
    #[arg(short = 's', long)]
    pub s: usize,
    #[arg(short = 'X', long = "x")]
    pub x: String,
    /// `random`, `file:PATH`, or `s*t` comma-separated coefficients (row by row).
    #[arg(long, default_value = "random")]
    pub alpha: String,
    #[arg(long, default_value = "mitm")]
    pub engine: String,
    /// Samples for the random engine.
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    /// T11, T12 or T41; defaults to T41 for t = 1 and T12 otherwise.
    #[arg(long)]
    pub theorem: Option<String>,
    #[arg(long, value_enum, default_value = "strict")]
    pub mode: ModeArg,
    /// Write `X,min,sigma_emp` rows as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

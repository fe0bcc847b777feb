use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use msl_core::suite::DEFAULT_SEED;

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "msl",
    version,
    about = "Microstate laboratory experiments",
    arg_required_else_help = true
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Serialize)]
pub struct Common {
    /// Seed for every random draw; fixed by default so runs reproduce.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Directory for report.json and CSV tables.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Tolerance override, e.g. `1e-9` or `metric=1e-9,algebraic=1e-12`.
    /// Applied on top of MSL_TOL.
    #[arg(long, global = true)]
    pub tol: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case", tag = "command")]
pub enum Command {
    /// δ₀ of a hyperfinite algebra given by its center decomposition.
    Delta0(SpecArgs),
    /// fdim of a hyperfinite algebra (agrees with delta0).
    Fdim(SpecArgs),
    /// Δ of a finite-dimensional algebra with positive trace.
    Capacity(SpecArgs),
    /// Trace-approximating embedding into M_k.
    Embed(EmbedArgs),
    /// Conjugate random pairs of representations and check the bound.
    Conjugate(ConjugateArgs),
    /// d₂ and a d_∞ bracket on U_k/H.
    QuotientDist(QuotientArgs),
    /// Packing and covering counts over an ε grid.
    Pack(PackArgs),
    /// Ball volumes Θ_d and a Monte Carlo estimate of Λ_d.
    Volume(VolumeArgs),
    /// Surrogate freeness of Haar-rotated half projections.
    Freeness(FreenessArgs),
    /// Run the acceptance battery.
    Suite(SuiteArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct SpecArgs {
    /// JSON spec: {"diffuse_weight":"0","blocks":[{"dim":2,"weight":"1"}]}.
    #[arg(long, visible_alias = "algebra")]
    pub spec: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct EmbedArgs {
    #[arg(long, visible_alias = "spec")]
    pub algebra: PathBuf,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 0.5)]
    pub r: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct ConjugateArgs {
    #[arg(long, visible_alias = "spec")]
    pub algebra: PathBuf,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 1)]
    pub trials: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SubgroupKind {
    Scalar,
    Torus,
    Full,
}

#[derive(Debug, Args, Serialize)]
pub struct QuotientArgs {
    #[arg(long)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = SubgroupKind::Scalar)]
    pub subgroup: SubgroupKind,
    /// Matrix JSON for u; Haar-random from the seed when absent.
    #[arg(long)]
    pub u: Option<PathBuf>,
    #[arg(long)]
    pub v: Option<PathBuf>,
    /// Local refinement steps for the d_∞ upper bound.
    #[arg(long, default_value_t = 200)]
    pub budget: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    /// U(1)^m with the max-chord metric.
    Torus,
    /// U_2 modulo scalars with d₂.
    U2,
}

#[derive(Debug, Args, Serialize)]
pub struct PackArgs {
    #[arg(long, value_enum)]
    pub target: Target,
    /// Torus dimension.
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    /// Comma-separated radii, in any order.
    #[arg(long, value_delimiter = ',', required = true)]
    pub eps: Vec<f64>,
    /// Number of sampled points.
    #[arg(long, default_value_t = 2000)]
    pub budget: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct VolumeArgs {
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// Monte Carlo samples.
    #[arg(long, default_value_t = 100_000)]
    pub budget: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct FreenessArgs {
    #[arg(long, default_value_t = 200)]
    pub k: usize,
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    #[arg(long, default_value_t = 0.05)]
    pub gamma: f64,
    #[arg(long, default_value_t = 200)]
    pub trials: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct SuiteArgs {
    /// Criterion ids to run; all when empty.
    pub only: Vec<u8>,
}

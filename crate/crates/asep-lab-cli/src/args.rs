use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug)]
#[command(name = "asep-lab", version, about = "Exact q-moments, dualities and KPZ-limit moments for open ASEP")]
#[command(args_override_self = true)]
pub struct Cli {
    /// Worker threads for parallel sections (defaults to all cores).
    #[arg(long, global = true, env = "ASEP_LAB_THREADS")]
    pub threads: Option<usize>,
    /// File of `key=value` lines, one per flag; explicit flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Command {
    /// q-moments E[∏ q^{N_{x_i}(t)}] of half-line ASEP from the contour-integral formula.
    Moments(MomentsArgs),
    /// Monte Carlo estimates of q-moments for half-line or segment ASEP.
    Simulate(SimulateArgs),
    /// Exact rational checks of the Markov dualities, one JSON line per instance.
    Verify(VerifyArgs),
    /// q-moments of segment ASEP from the dual linear ODE.
    Segment(SegmentArgs),
    /// Moments of the half-line stochastic heat equation and the ASEP scaling bridge.
    Kpz(KpzArgs),
    /// Re-run the manifest embedded in an output file.
    #[serde(skip)]
    Replay {
        /// CSV, JSON or JSON-lines file produced by this tool.
        file: PathBuf,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

/// Half-line rates, given as exact decimals or fractions such as `3/4`.
#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct Rates {
    /// Right jump rate 𝗉.
    #[arg(long, default_value = "1")]
    pub p: String,
    /// Left jump rate 𝗊 (q = 𝗊/𝗉 must lie in (0, 1)).
    #[arg(long, default_value = "1/2")]
    pub q: String,
    /// Injection rate α at site 1.
    #[arg(long, requires = "gamma", conflicts_with = "rho")]
    pub alpha: Option<String>,
    /// Ejection rate γ at site 1.
    #[arg(long, requires = "alpha", conflicts_with = "rho")]
    pub gamma: Option<String>,
    /// Boundary density ρ = α/𝗉; γ is completed from Liggett's condition.
    #[arg(long)]
    pub rho: Option<String>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct MomentsArgs {
    /// Number of sites; must match the length of --x when given.
    #[arg(long)]
    pub n: Option<usize>,
    /// Times, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub t: Vec<f64>,
    /// Strictly increasing sites, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub x: Vec<i64>,
    #[command(flatten)]
    pub rates: Rates,
    /// Trapezoid nodes per dimension (even, at least 16); chosen from q and x when omitted.
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimKind {
    Halfline,
    Segment,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value = "halfline")]
    pub model: SimKind,
    #[command(flatten)]
    pub rates: Rates,
    /// Segment length ℓ (sites 1..ℓ−1).
    #[arg(long)]
    pub ell: Option<usize>,
    /// Right reservoir density ρ_ℓ = δ/𝗊 for the segment.
    #[arg(long)]
    pub rho_ell: Option<String>,
    /// Segment initial occupation as a bit string over sites 1..ℓ−1 (empty when omitted).
    #[arg(long)]
    pub initial: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, default_value_t = 10_000)]
    pub trajectories: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Observable sites, comma separated; repeat the flag for several observables.
    #[arg(long = "observable", required = true)]
    pub observables: Vec<String>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerifyMode {
    Fullspace,
    Halfline,
    Segment,
    NoLiggett,
    Fictitious,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub mode: VerifyMode,
    #[command(flatten)]
    pub rates: Rates,
    /// Largest site used for η and x (half-line modes).
    #[arg(long, default_value_t = 6)]
    pub max_site: i64,
    /// Largest number of dual particles.
    #[arg(long, default_value_t = 3)]
    pub n_max: usize,
    /// Segment length; with --mode fictitious it selects the segment version.
    #[arg(long)]
    pub ell: Option<usize>,
    #[arg(long)]
    pub rho_ell: Option<String>,
    /// Through counts N_ℓ to enumerate (segment modes).
    #[arg(long, value_delimiter = ',', default_value = "0,1")]
    pub through: Vec<i64>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct SegmentArgs {
    #[arg(long)]
    pub ell: usize,
    #[command(flatten)]
    pub rates: Rates,
    #[arg(long)]
    pub rho_ell: String,
    /// Number of dual particles.
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub t: Vec<f64>,
    /// Initial occupation as a bit string over sites 1..ℓ−1 (empty when omitted).
    #[arg(long)]
    pub initial: Option<String>,
    /// Initial through count N_ℓ.
    #[arg(long, default_value_t = 0)]
    pub through: i64,
    /// Report only these sites (comma separated); all chamber vectors when omitted.
    #[arg(long, value_delimiter = ',')]
    pub x: Option<Vec<i64>>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryKind {
    Robin,
    Dirichlet,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KpzForm {
    Nested,
    Residue,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct KpzArgs {
    #[arg(long, value_enum, default_value = "robin")]
    pub boundary: BoundaryKind,
    /// Robin parameter A > 0.
    #[arg(long = "A")]
    pub a: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    /// Nonnegative, weakly increasing positions, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub x: Vec<f64>,
    #[arg(long, value_enum, default_value = "nested")]
    pub form: KpzForm,
    /// ε values for the weakly asymmetric ASEP moments, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

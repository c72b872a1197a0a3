//! Command-line front end: closed-form bounds, oracle sweeps, RIC tables and
//! Monte Carlo experiments, all written as CSV.

pub mod commands;
pub mod table;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use commands::{run, Outcome};
pub use table::Table;

#[derive(Debug, Clone, Parser)]
#[command(
    name = "ripangle",
    version,
    about = "Angles between RIP-compressed sparse vectors"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Write the CSV here (plus a `<path>.manifest` sidecar) instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Achievable angle interval for one (delta, theta).
    Bounds(BoundsArgs),
    /// Closed-form intervals over a grid, optionally against the brute-force oracle.
    Sweep(SweepArgs),
    /// Projected RIC, inversions, error bounds and OMP thresholds.
    Ric(RicArgs),
    /// Check measured angles of random sparse pairs against their intervals.
    Containment(ContainmentArgs),
    /// Check retained energy after projecting out an interference support.
    Projric(ProjricArgs),
    /// OMP recovery rates, or recovery on an exhaustively certified matrix.
    Omp(OmpArgs),
}

#[derive(Debug, Clone, Args)]
#[group(id = "theta", required = true, multiple = false)]
pub struct ThetaArg {
    #[arg(long = "theta-deg")]
    pub theta_deg: Option<f64>,
    #[arg(long = "theta-rad")]
    pub theta_rad: Option<f64>,
}

impl ThetaArg {
    pub fn radians(&self) -> f64 {
        match (self.theta_deg, self.theta_rad) {
            (Some(d), _) => d.to_radians(),
            (_, Some(r)) => r,
            _ => unreachable!("clap enforces one theta flag"),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct BoundsArgs {
    #[arg(long)]
    pub delta: f64,
    #[command(flatten)]
    pub theta: ThetaArg,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Isometry constants, comma separated.
    #[arg(
        long = "delta",
        value_delimiter = ',',
        default_value = "0.05,0.1,0.15,0.2,0.25,0.3,0.35,0.4,0.45,0.5,0.55,0.6,0.65,0.7,0.75,0.8,0.85,0.9"
    )]
    pub deltas: Vec<f64>,
    /// Input angles in degrees, comma separated.
    #[arg(
        long = "theta-deg",
        value_delimiter = ',',
        default_value = "5,10,15,20,25,30,35,40,45,50,55,60,65,70,75,80,85,90"
    )]
    pub thetas_deg: Vec<f64>,
    /// Also run the brute-force oracle at every point.
    #[arg(long)]
    pub oracle: bool,
    #[arg(long = "grid-n", default_value_t = 96)]
    pub grid_n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Curve {
    /// Projected and algebraic RIC against delta.
    Projected,
    /// Both inversions against the target tau.
    Inversion,
    /// Reconstruction error bounds against delta.
    ErrorBound,
    /// Both OMP thresholds against K.
    Omp,
}

#[derive(Debug, Clone, Args)]
pub struct RicArgs {
    #[command(flatten)]
    pub mode: RicMode,
    /// Noise level for the error bounds.
    #[arg(long, default_value_t = 0.01)]
    pub eps: f64,
    /// Largest K in the OMP curve.
    #[arg(long = "k-max", default_value_t = 100)]
    pub k_max: usize,
    /// Grid points in the delta and tau curves.
    #[arg(long = "points", default_value_t = 99)]
    pub points: usize,
}

#[derive(Debug, Clone, Args)]
#[group(id = "ric_mode", required = true, multiple = false)]
pub struct RicMode {
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long = "omp-K")]
    pub omp_k: Option<usize>,
    #[arg(long, value_enum)]
    pub curve: Option<Curve>,
}

#[derive(Debug, Clone, Args)]
pub struct SensingArgs {
    #[arg(long)]
    pub p: usize,
    #[arg(long)]
    pub m: usize,
    #[arg(long = "K")]
    pub k: usize,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    /// One or more seeds, comma separated; each runs a full batch.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub seed: Vec<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct ContainmentArgs {
    #[command(flatten)]
    pub sensing: SensingArgs,
    /// Fixed input angles in degrees; default is uniform on (0, 90].
    #[arg(long = "theta-deg", value_delimiter = ',')]
    pub thetas_deg: Vec<f64>,
    /// One matrix per batch instead of one per pair.
    #[arg(long = "reuse-matrix")]
    pub reuse_matrix: bool,
    /// Compute bounds with this constant instead of each pair's support constant.
    #[arg(long = "bound-delta")]
    pub bound_delta: Option<f64>,
    #[arg(long = "sizing-constant", default_value_t = 0.5)]
    pub sizing_constant: f64,
}

#[derive(Debug, Clone, Args)]
pub struct ProjricArgs {
    #[command(flatten)]
    pub sensing: SensingArgs,
    #[arg(long = "kI")]
    pub k_i: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Design {
    Gaussian,
    NearOrthogonal,
}

#[derive(Debug, Clone, Args)]
pub struct OmpArgs {
    #[arg(long)]
    pub p: usize,
    /// Measurements; only used with --certify, otherwise sized from the threshold.
    #[arg(long)]
    pub m: Option<usize>,
    /// Sparsity levels, comma separated (a single value with --certify).
    #[arg(long = "K", value_delimiter = ',', required = true)]
    pub k: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long = "sizing-constant", default_value_t = 0.5)]
    pub sizing_constant: f64,
    /// Search for a matrix whose exhaustive RIC of order K+1 is below the threshold.
    #[arg(long)]
    pub certify: bool,
    #[arg(long, value_enum, default_value_t = Design::NearOrthogonal)]
    pub design: Design,
    #[arg(long, default_value_t = 0.005)]
    pub perturbation: f64,
    #[arg(long = "max-instances", default_value_t = 64)]
    pub max_instances: usize,
}

use std::path::PathBuf;

use ajd_core::ojd::OjdConfig;
use ajd_core::sdiag::{EigStrategy, SdiagConfig};
use ajd_core::simkit::{Algorithm, Mixing};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "ajd",
    version,
    about = "Approximate joint diagonalization of symmetric matrix sets"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Jointly diagonalize the matrices of a JSON matrix-set file.
    Diagonalize(DiagonalizeArgs),
    /// Run one simulated scenario and write per-trial CSV rows.
    Simulate(SimulateArgs),
    /// Run the sigma x mixing x algorithm grid and print a summary table.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AlgoName {
    Sdiag,
    Ojd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EigName {
    Full,
    Power,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MixingName {
    Orthogonal,
    General,
}

impl From<MixingName> for Mixing {
    fn from(m: MixingName) -> Self {
        match m {
            MixingName::Orthogonal => Mixing::Orthogonal,
            MixingName::General => Mixing::General,
        }
    }
}

/// Solver settings shared by every command.
#[derive(Clone, Debug, Args)]
pub struct SolverArgs {
    /// Rank-truncation factor: keep eigen-directions of M above lambda_max / f.
    #[arg(long, default_value_t = 1e12)]
    pub f: f64,
    /// Convergence tolerance (SDIAG: change of sqrt(off) relative to its start;
    /// OJD: smallest rotation angle).
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    /// Iteration cap (SDIAG iterations or OJD sweeps).
    #[arg(long = "max-iter", default_value_t = 1000)]
    pub max_iter: usize,
    /// How SDIAG finds principal eigenvectors.
    #[arg(long, value_enum, default_value_t = EigName::Full)]
    pub eig: EigName,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    #[arg(long, short)]
    pub verbose: bool,
}

impl SolverArgs {
    pub fn sdiag_config(&self) -> SdiagConfig {
        SdiagConfig {
            f: self.f,
            rel_tol: self.tol,
            max_iterations: self.max_iter,
            eig_strategy: match self.eig {
                EigName::Full => EigStrategy::FullEig,
                EigName::Power => EigStrategy::PowerPasses,
            },
            ..SdiagConfig::default()
        }
    }

    pub fn ojd_config(&self) -> OjdConfig {
        OjdConfig {
            max_sweeps: self.max_iter,
            angle_tol: self.tol,
        }
    }

    pub fn algorithm(&self, name: AlgoName) -> Algorithm {
        match name {
            AlgoName::Sdiag => Algorithm::Sdiag(self.sdiag_config()),
            AlgoName::Ojd => Algorithm::Ojd(self.ojd_config()),
        }
    }
}

#[derive(Debug, Args)]
pub struct DiagonalizeArgs {
    /// Matrix-set JSON file.
    #[arg(long)]
    pub input: PathBuf,
    /// Where to write B; without it B and the report go to stdout together.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Where to write the report (default: `<out>` with `.report.json`).
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = AlgoName::Sdiag)]
    pub algo: AlgoName,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    #[arg(long, default_value_t = 30)]
    pub k: usize,
    /// Noise standard deviation.
    #[arg(long, default_value_t = 0.01)]
    pub sigma: f64,
    #[arg(long, value_enum, default_value_t = MixingName::Orthogonal)]
    pub mixing: MixingName,
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = AlgoName::Sdiag)]
    pub algo: AlgoName,
    /// CSV destination; without it the CSV goes to stdout and the summary to stderr.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    #[arg(long, default_value_t = 30)]
    pub k: usize,
    /// Trials per cell (250 for the full-scale run).
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Noise levels of the grid (repeatable).
    #[arg(long = "sigma", default_values_t = [0.01, 0.03])]
    pub sigmas: Vec<f64>,
    /// Raw per-trial CSV.
    #[arg(long, default_value = "bench.csv")]
    pub out: PathBuf,
    #[command(flatten)]
    pub solver: SolverArgs,
}

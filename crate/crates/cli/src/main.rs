use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod output;

/// Kernel-method solver for stationary random walks in the quarter plane.
#[derive(Debug, Parser)]
#[command(name = "quadwalk", version, about)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Model file (JSON), or `@name` for a built-in fixture (m1, m2, m3, simple-walk, conjugate-cut).
    #[arg(long, global = true, value_name = "PATH")]
    pub model: Option<String>,
    /// Output directory; created if missing. Results go to stdout when omitted.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Samples per traced curve.
    #[arg(long, global = true, default_value_t = 1024, value_name = "K")]
    pub n_samples: usize,
    /// Side of the truncation window of the oracle chain.
    #[arg(long, global = true, default_value_t = 400, value_name = "N")]
    pub truncation: usize,
    /// Seed of the Monte Carlo generator.
    #[arg(long, global = true, default_value_t = 1, value_name = "S")]
    pub seed: u64,
    /// Override a tolerance, e.g. `--tol closure=1e-9`. Repeatable; unknown keys are rejected.
    #[arg(long = "tol", global = true, value_name = "KEY=VAL")]
    pub tol: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlaneArg {
    X,
    Y,
}

impl From<PlaneArg> for quadwalk::Plane {
    fn from(p: PlaneArg) -> Self {
        match p {
            PlaneArg::X => quadwalk::Plane::X,
            PlaneArg::Y => quadwalk::Plane::Y,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a model file and report errors and warnings.
    Validate,
    /// Branch points of both planes with their classification.
    BranchPoints,
    /// Genus of the kernel curve.
    Genus,
    /// Trace the curves over the interior cuts of one plane.
    TraceCurve {
        /// Plane holding the cut; the curve lives in the other variable.
        #[arg(long, value_enum, default_value = "y")]
        cut_plane: PlaneArg,
    },
    /// Sample the boundary condition (or the vector system for larger negative jumps).
    BoundaryCondition,
    /// Solve for the stationary distribution.
    Solve {
        /// Largest index of the coefficient table.
        #[arg(long, default_value_t = 10)]
        order: usize,
    },
    /// Brute-force references.
    #[command(subcommand)]
    Oracle(OracleCommand),
    /// Analytic coefficients against the truncated-chain oracle.
    Compare {
        #[arg(long, default_value_t = 10)]
        order: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum OracleCommand {
    /// Stationary vector of the truncated chain.
    Stationary,
    /// Visit frequencies of one simulated trajectory.
    MonteCarlo {
        #[arg(long, default_value_t = 1_000_000)]
        steps: u64,
    },
    /// Branch points located by a root-gap grid sweep.
    Sweep {
        #[arg(long, default_value_t = 25.0)]
        radius: f64,
        #[arg(long, default_value_t = 0.05)]
        step: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

//! `frac-gelfand`: constants, thresholds, operator checks and branch tracing
//! for `(-Δ)^s u = λ e^u` in the unit ball.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use output::Failure;

#[derive(Debug, Parser, Serialize)]
#[command(name = "frac-gelfand", version, about = "Fractional Gelfand problem on the unit ball")]
pub struct Cli {
    /// Directory for CSV/JSON artifacts.
    #[arg(long, global = true, env = "GELFAND_OUT_DIR", default_value = "gelfand-out")]
    pub out_dir: PathBuf,

    /// What to print on stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Command {
    /// λ₀, the Hardy constant, the margin and the regime for one (n, s).
    Constants(ProblemArgs),
    /// Critical fractional orders for dimensions 1..=n-max.
    Threshold(ThresholdArgs),
    /// Check the discrete operator on global powers and the ε-limits.
    VerifyPowers(VerifyArgs),
    /// Trace the minimal branch in the peak value.
    Branch(BranchArgs),
    /// Stability eigenvalue at one peak, or at the explicit singular solution.
    Stability(StabilityArgs),
    /// Singular-profile diagnostic at the top of a branch.
    Diagnose(DiagnoseArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ProblemArgs {
    /// Dimension.
    #[arg(long)]
    pub n: u32,
    /// Fractional order in (0, 1).
    #[arg(long)]
    pub s: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GridArgs {
    /// Number of grid intervals.
    #[arg(long, default_value_t = 256)]
    pub grid: usize,
    /// Grading exponent of the mesh.
    #[arg(long, default_value_t = frac_gelfand::fraclap::DEFAULT_GRADING)]
    pub grading: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ThresholdArgs {
    /// Largest dimension to scan.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub n_max: u32,
    /// Bisection tolerance on s.
    #[arg(long, default_value_t = frac_gelfand::threshold::DEFAULT_TOL)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Exponents of the powers r^{-α}; defaults to (n − 2s)/2.
    #[arg(long, num_args = 1..)]
    pub alpha: Vec<f64>,
    /// Number of grid intervals.
    #[arg(long, default_value_t = 512)]
    pub grid: usize,
    /// Relative error allowed on r in [0.2, 0.8].
    #[arg(long, default_value_t = 1e-2)]
    pub tol: f64,
    /// Also print the ε-expansion table.
    #[arg(long)]
    pub eps_table: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ContinuationArgs {
    /// First peak value u(0).
    #[arg(long, default_value_t = 0.05)]
    pub peak_start: f64,
    /// Stop once the peak exceeds this.
    #[arg(long, default_value_t = 8.0)]
    pub peak_max: f64,
    /// Peak increment between branch points.
    #[arg(long, default_value_t = 0.05)]
    pub peak_step: f64,
    /// Backward-error tolerance for Newton.
    #[arg(long, default_value_t = frac_gelfand::gelfand::DEFAULT_NEWTON_TOL)]
    pub newton_tol: f64,
    /// Newton iterations per point.
    #[arg(long, default_value_t = frac_gelfand::gelfand::DEFAULT_MAX_ITERS)]
    pub max_iters: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BranchArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub continuation: ContinuationArgs,
    /// Check stability and the test-function inequality on pre-fold points.
    #[arg(long)]
    pub verify: bool,
    /// Cutoff radius of the test functions used by --verify.
    #[arg(long, default_value_t = 0.5)]
    pub rho0: f64,
    /// Attach the singular-profile diagnostic with this σ.
    #[arg(long)]
    pub diagnose_sigma: Option<f64>,
    /// Include full profiles in the JSON artifact.
    #[arg(long)]
    pub profiles: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct StabilityArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Peak value u(0) of the solution.
    #[arg(long, required_unless_present = "singular")]
    pub peak: Option<f64>,
    /// Use u = log r^{-2s}, λ = λ₀ with matching exterior data instead.
    #[arg(long, conflicts_with = "peak")]
    pub singular: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DiagnoseArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub continuation: ContinuationArgs,
    #[arg(long, default_value_t = 0.5)]
    pub sigma: f64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

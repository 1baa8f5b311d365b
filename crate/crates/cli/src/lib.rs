//! Command-line front end: assumption checks, single-point solves, grid
//! sweeps, grid verification of the equilibrium characterization and Monte
//! Carlo validation, with CSV and JSON output.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use externalization_core::ActionProfile;

mod commands;
pub mod config;
pub mod num;

/// Value of the `schema` field in every JSON report.
pub const SCHEMA: &str = "externalization-lab/1";

/// Process exit statuses.
pub mod exit {
    pub const OK: i32 = 0;
    pub const ASSUMPTION_FAILED: i32 = 1;
    pub const INVALID: i32 = 2;
    pub const IO: i32 = 3;
    pub const NOT_APPLICABLE: i32 = 4;
    pub const CLAUSE_FAILED: i32 = 5;
}

#[derive(Debug, Parser)]
#[command(name = "externalization-lab", version, about = "Conflict-externalization game toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the three standing assumptions; exit 1 if any fails.
    Check(Common),
    /// Payoff table, thresholds and pure equilibria at one point.
    Solve(PointArgs),
    /// Evaluate the (g, phi) grid from the config and write CSV files.
    Sweep(SweepArgs),
    /// Check the equilibrium characterization on the (g, phi) grid.
    Verify(VerifyArgs),
    /// Monte Carlo estimates against closed forms.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Model configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Print the report as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct PointArgs {
    #[command(flatten)]
    pub common: Common,
    /// Override `g` from the config.
    #[arg(long)]
    pub g: Option<f64>,
    /// Override `phi` from the config.
    #[arg(long)]
    pub phi: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    /// Directory for sweep.csv and boundary.csv.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    /// Directory for verify.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub point: PointArgs,
    /// Number of samples (overrides sim.n).
    #[arg(long)]
    pub n: Option<u64>,
    /// RNG seed (overrides sim.seed).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Action profile: aa, ap, pa or pp (overrides sim.profile).
    #[arg(long)]
    pub profile: Option<ActionProfile>,
    /// Write every sample to this CSV file.
    #[arg(long)]
    pub dump: Option<PathBuf>,
}

/// Runs one command, writing the report to `out` and diagnostics to `err`.
/// Returns the exit status.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match &cli.command {
        Command::Check(a) => commands::check(a, out, err),
        Command::Solve(a) => commands::solve(a, out, err),
        Command::Sweep(a) => commands::sweep(a, out, err),
        Command::Verify(a) => commands::verify(a, out, err),
        Command::Simulate(a) => commands::simulate(a, out, err),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            // a closed pipe leaves nothing to report to
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use duotherm::export::Field;
use duotherm::setups::SetupId;
use duotherm::thermal::BetaConvention;

#[derive(Debug, Parser)]
#[command(
    name = "duotherm",
    version,
    about = "Two-temperature quantum thermometry sweeps"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the Cramér-Rao bounds over a temperature grid.
    Sweep {
        #[command(flatten)]
        spec: SpecArgs,
        /// Output path; the extension is replaced per format. CSV goes to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Column rendered in the PGM heatmap.
        #[arg(long, default_value = "var_t1", value_parser = parse_field)]
        field: Field,
    },
    /// Bounds at a single temperature pair, printed as one CSV row.
    Bounds {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        t1: f64,
        #[arg(long)]
        t2: f64,
    },
    /// Finite variance ranges of every setup on the same grid.
    Compare {
        #[command(flatten)]
        spec: SpecArgs,
        /// Write the table here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the built-in invariant checks.
    Validate {
        /// Side of the temperature grids used by the checks.
        #[arg(long, default_value_t = 5)]
        grid: usize,
        /// Emit the report as JSON.
        #[arg(long)]
        json: bool,
        /// Corrupt one Kraus operator to exercise the failure path.
        #[arg(long, hide = true)]
        inject_defect: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Pgm,
    Both,
}

/// Sweep parameters. Anything given here overrides the JSON config.
#[derive(Debug, Clone, Default, Args)]
pub struct SpecArgs {
    /// JSON file with sweep settings.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_parser = parse_setup)]
    pub setup: Option<SetupId>,
    /// Probe register size (2 is allowed for mz1b and mz2b).
    #[arg(long)]
    pub qubits: Option<usize>,
    #[arg(long)]
    pub tmin: Option<f64>,
    #[arg(long)]
    pub tmax: Option<f64>,
    /// Grid points per temperature axis.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Phase-shifter phase in radians.
    #[arg(long, allow_negative_numbers = true)]
    pub phi: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long, value_parser = parse_convention)]
    pub beta_convention: Option<BetaConvention>,
    /// Relative finite-difference step.
    #[arg(long)]
    pub step: Option<f64>,
    /// Number of repetitions N in the bound.
    #[arg(long)]
    pub repetitions: Option<u32>,
}

fn parse_setup(s: &str) -> Result<SetupId, String> {
    s.parse().map_err(|e: duotherm::Error| e.to_string())
}

fn parse_convention(s: &str) -> Result<BetaConvention, String> {
    s.parse().map_err(|e: duotherm::Error| e.to_string())
}

fn parse_field(s: &str) -> Result<Field, String> {
    s.parse().map_err(|e: duotherm::Error| e.to_string())
}

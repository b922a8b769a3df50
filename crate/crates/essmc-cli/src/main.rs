//! Command line front end for the essmc toolkit.
//!
//! Every subcommand prints a JSON summary on stdout and, on failure, one
//! JSON line `{"error": ..., "class": ...}` on stderr. Exit codes: 0 on
//! success, 3 when parameters are structurally fine but infeasible, 2 for
//! everything else (bad config, io, domain).

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use essmc::EssmcError;

#[derive(Parser)]
#[command(
    name = "essmc",
    version,
    about = "Simulation and tuning toolkit for energy-saving sub-optimal sliding mode control"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one closed-loop simulation from a JSON config.
    Simulate(SimulateArgs),
    /// Run every configured controller over one scenario and compare.
    Compare(CompareArgs),
    /// Scan the (beta1, beta2) energy-cost landscape for a given
    /// disturbance ratio.
    Tune(TuneArgs),
    /// Predict the chattering limit cycle under first-order actuator lag.
    Chatter(ChatterArgs),
    /// Generate a rough-surface height profile.
    Surface(SurfaceArgs),
    /// Compare the time-optimal and fuel-optimal laws from one initial
    /// state on the undisturbed plant.
    Fueloptimal(FuelArgs),
    /// Check controller parameters against their convergence conditions.
    Validate(ValidateArgs),
}

#[derive(Args)]
pub(crate) struct SimulateArgs {
    /// JSON config: a plain closed-loop config, or {"scenario": {...}}.
    #[arg(long)]
    pub config: PathBuf,
    /// Trace CSV destination.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Override the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override the sigma convergence band (plain configs only).
    #[arg(long)]
    pub eps_sigma: Option<f64>,
    /// Override the sigma-dot convergence band (plain configs only).
    #[arg(long)]
    pub eps_dsigma: Option<f64>,
    /// Validate, print the resolved config and stop before running.
    #[arg(long)]
    pub dry_run: bool,
    /// Write a run manifest (command line, config, outputs, wall time).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
pub(crate) enum ScenarioKindArg {
    Scan,
    Machining,
}

#[derive(Args)]
pub(crate) struct CompareArgs {
    /// Scenario JSON config; omit for the stock scenario.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Scenario to run when no config file is given.
    #[arg(long, value_enum, default_value = "scan")]
    pub kind: ScenarioKindArg,
    /// Override the scenario seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Directory for per-controller trace CSVs plus comparison.json.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Validate, print the resolved scenario and stop before running.
    #[arg(long)]
    pub dry_run: bool,
    /// Write a run manifest.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Args)]
pub(crate) struct TuneArgs {
    /// Disturbance-to-authority ratio Delta/U, in [0, 1).
    #[arg(long)]
    pub delta_ratio: f64,
    /// Grid resolution per axis.
    #[arg(long, default_value_t = 120)]
    pub resolution: usize,
    /// Cap on the conventional-law cost; default 3x its minimum.
    #[arg(long)]
    pub j_hat_max: Option<f64>,
    /// Full grid CSV destination.
    #[arg(long)]
    pub grid_csv: Option<PathBuf>,
    /// Result JSON destination (also printed on stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write a run manifest.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
pub(crate) enum ChatterMethod {
    ClosedForm,
    Balance,
    Both,
}

#[derive(Args)]
pub(crate) struct ChatterArgs {
    /// Actuator time constant in seconds, > 0.
    #[arg(long)]
    pub mu: f64,
    #[arg(long)]
    pub beta1: f64,
    /// Defaults to beta1, which models the conventional law.
    #[arg(long, allow_hyphen_values = true)]
    pub beta2: Option<f64>,
    /// Relay authority.
    #[arg(long, default_value_t = 1.0)]
    pub u: f64,
    #[arg(long, value_enum, default_value = "both")]
    pub method: ChatterMethod,
}

#[derive(Args)]
pub(crate) struct SurfaceArgs {
    /// Roughness coefficient R.
    #[arg(long, default_value_t = 2e-11)]
    pub roughness: f64,
    /// Relative surface speed in m/s.
    #[arg(long, default_value_t = 1e-4)]
    pub nu: f64,
    /// Spatial cutoff in cycles/m.
    #[arg(long, default_value_t = 1.0 / (2.0 * std::f64::consts::PI * 1e-4))]
    pub v0: f64,
    #[arg(long, default_value_t = 2e-6)]
    pub dt: f64,
    /// Profile length in seconds.
    #[arg(long, default_value_t = 2.0)]
    pub duration: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Rescale R so the peak-to-peak height hits this target, in m.
    #[arg(long)]
    pub calibrate_ptp: Option<f64>,
    /// Profile CSV destination.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Welch PSD estimate destination.
    #[arg(long)]
    pub psd_out: Option<PathBuf>,
    /// Welch segment count for --psd-out.
    #[arg(long, default_value_t = 8)]
    pub segments: usize,
    /// Validate, print the resolved parameters and stop.
    #[arg(long)]
    pub dry_run: bool,
    /// Write a run manifest.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Args)]
pub(crate) struct FuelArgs {
    /// Initial position error.
    #[arg(long, allow_hyphen_values = true)]
    pub x1: f64,
    /// Initial velocity.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub x2: f64,
    /// Control authority.
    #[arg(long, default_value_t = 1.0)]
    pub u: f64,
    /// Response-time factor K >= 1 of the fuel-optimal law.
    #[arg(long, default_value_t = 2.0)]
    pub k: f64,
    #[arg(long, default_value_t = 2e-4)]
    pub dt: f64,
    /// Horizon; default 1.2 K t* + 1.
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Write <prefix>_time_optimal.csv and <prefix>_fuel_optimal.csv.
    #[arg(long)]
    pub out_prefix: Option<PathBuf>,
    /// Write a run manifest.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Args)]
pub(crate) struct ValidateArgs {
    /// JSON config: plain closed-loop config or {"scenario": {...}}.
    #[arg(long)]
    pub config: PathBuf,
}

fn error_class(e: &EssmcError) -> &'static str {
    match e {
        EssmcError::Config(_) => "config",
        EssmcError::InvalidState(_) => "invalid-state",
        EssmcError::Domain(_) => "domain",
        EssmcError::Infeasible(_) => "infeasible",
        EssmcError::Io(_) => "io",
        EssmcError::Json(_) => "json",
    }
}

fn main() -> ExitCode {
    let started = Instant::now();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(a) => commands::simulate(a, started),
        Command::Compare(a) => commands::compare(a, started),
        Command::Tune(a) => commands::tune_grid(a, started),
        Command::Chatter(a) => commands::chatter(a),
        Command::Surface(a) => commands::surface(a, started),
        Command::Fueloptimal(a) => commands::fuel_optimal(a, started),
        Command::Validate(a) => commands::validate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!(
                "{}",
                serde_json::json!({ "error": e.to_string(), "class": error_class(&e) })
            );
            match e {
                EssmcError::Infeasible(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

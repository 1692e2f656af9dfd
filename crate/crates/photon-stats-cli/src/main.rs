//! `photon-stats`: machine-readable tables for thermal photon counting
//! statistics under independent-photon and whole-state transmission.
//!
//! Exit codes: 0 success, 2 usage or domain error, 1 internal error.

mod cmds;
mod output;

use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use photon_stats::TransmissionModel;

use output::Format;

#[derive(Parser)]
#[command(
    name = "photon-stats",
    version,
    about = "Photon counting statistics of thermal light at lossy boundaries",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Model {
    /// Each photon crosses the boundary on its own.
    Independent,
    /// The state crosses as a whole or not at all.
    Wave,
}

impl From<Model> for TransmissionModel {
    fn from(model: Model) -> Self {
        match model {
            Model::Independent => TransmissionModel::Independent,
            Model::Wave => TransmissionModel::Wave,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Thermal (Bose-Einstein) photon number distribution.
    Pmf(PmfArgs),
    /// One pass through a partially transmitting boundary.
    Transmit(TransmitArgs),
    /// Multi-bounce escape decomposition from a cavity behind the boundary.
    Cavity(CavityArgs),
    /// Stochastic cross-check of the analytic tables.
    Montecarlo(MontecarloArgs),
    /// Second-moment discrimination of the two transmission models.
    Compare(CompareArgs),
    /// Mean occupancy and spectral density at one frequency point.
    Planck(PlanckArgs),
}

#[derive(Args)]
struct PmfArgs {
    /// Mean photon number of the mode.
    #[arg(long, allow_negative_numbers = true)]
    mean: f64,
    /// Geometric tail mass at which the support is cut.
    #[arg(long, default_value_t = 1e-14, allow_negative_numbers = true)]
    tail_tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct TransmitArgs {
    #[arg(long, value_enum)]
    model: Model,
    /// Mean photon number of the incident mode.
    #[arg(long, allow_negative_numbers = true)]
    mean: f64,
    /// Boundary transmittance in [0, 1].
    #[arg(long, allow_negative_numbers = true)]
    a: f64,
    /// Geometric tail mass at which the input support is cut.
    #[arg(long, default_value_t = 1e-14, allow_negative_numbers = true)]
    tail_tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct CavityArgs {
    #[arg(long, value_enum)]
    model: Model,
    /// Mean photon number of the mode inside the cavity.
    #[arg(long, allow_negative_numbers = true)]
    mean: f64,
    /// Mirror transmittance in (0, 1].
    #[arg(long, allow_negative_numbers = true)]
    a: f64,
    /// Highest bounce order kept; defaults to the smallest order whose
    /// residual weight drops below 1e-12.
    #[arg(long)]
    imax: Option<usize>,
    /// Geometric tail mass at which each bounce distribution is cut.
    #[arg(long, default_value_t = 1e-14, allow_negative_numbers = true)]
    tail_tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct MontecarloArgs {
    #[arg(long, value_enum)]
    model: Model,
    /// Mean photon number of the source mode.
    #[arg(long, allow_negative_numbers = true)]
    mean: f64,
    /// Transmittance in [0, 1] (cavity runs require it nonzero).
    #[arg(long, allow_negative_numbers = true)]
    a: f64,
    /// Number of independent trials.
    #[arg(long, default_value_t = 1_000_000)]
    trials: u64,
    /// Generator seed; identical seeds reproduce the table byte for byte.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Simulate multi-bounce cavity escape instead of a single pass.
    #[arg(long)]
    cavity: bool,
    /// Bounce cutoff for cavity runs; defaults to the smallest count whose
    /// stay-inside probability drops below 1e-9.
    #[arg(long, requires = "cavity")]
    cutoff: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct CompareArgs {
    /// Mean photon number of the mode inside the cavity.
    #[arg(long, allow_negative_numbers = true)]
    mean: f64,
    /// Comma-separated transmittance grid.
    #[arg(
        long = "a-grid",
        value_delimiter = ',',
        default_value = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0"
    )]
    a_grid: Vec<f64>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct PlanckArgs {
    /// Reduced frequency hbar*omega/(k*T); excludes --omega/--temperature.
    #[arg(long, conflicts_with_all = ["omega", "temperature"], allow_negative_numbers = true)]
    x: Option<f64>,
    /// Angular frequency in rad/s; requires --temperature.
    #[arg(long, requires = "temperature", allow_negative_numbers = true)]
    omega: Option<f64>,
    /// Temperature in kelvin; requires --omega.
    #[arg(long, requires = "omega", allow_negative_numbers = true)]
    temperature: Option<f64>,
    /// Boundary transmittance scaling the emitted density.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    a: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

fn run(command: Command) -> photon_stats::Result<(String, Format)> {
    Ok(match command {
        Command::Pmf(args) => (
            cmds::pmf(args.mean, args.tail_tol)?.render(args.format),
            args.format,
        ),
        Command::Transmit(args) => (
            cmds::transmit(args.model.into(), args.mean, args.a, args.tail_tol)?
                .render(args.format),
            args.format,
        ),
        Command::Cavity(args) => (
            cmds::cavity(args.model.into(), args.mean, args.a, args.imax, args.tail_tol)?
                .render(args.format),
            args.format,
        ),
        Command::Montecarlo(args) => (
            cmds::montecarlo(
                args.model.into(),
                args.mean,
                args.a,
                args.trials,
                args.seed,
                args.cavity,
                args.cutoff,
            )?
            .render(args.format),
            args.format,
        ),
        Command::Compare(args) => (
            cmds::compare(args.mean, &args.a_grid)?.render(args.format),
            args.format,
        ),
        Command::Planck(args) => {
            if args.x.is_none() && args.omega.is_none() {
                // Mirror clap's usage-error behavior for the missing pair.
                eprintln!(
                    "error: one of --x or --omega with --temperature is required"
                );
                std::process::exit(2);
            }
            (
                cmds::planck(args.x, args.omega, args.temperature, args.a)?.render(args.format),
                args.format,
            )
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok((text, _format)) => {
            // A closed stdout (e.g. a dropped pipe) is an environment
            // failure, not a usage error.
            if std::io::stdout().write_all(text.as_bytes()).is_err() {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

//! `loiter`: pack, optimize, simulate, sweep and plan transitions from a
//! JSON scenario file.

mod commands;
mod config;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Overrides, Scenario, Table1ModeName};

#[derive(Parser)]
#[command(name = "loiter", version, about = "Loiter-circle coverage planning for fixed-wing UAV fleets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pack circles of the configured radius and report coverage.
    Pack(Common),
    /// Find the smallest loiter radius the fleet budget can sustain.
    Optimize(Common),
    /// Deploy, inject failures and run the recovery pipeline.
    Simulate(Common),
    /// Recovered radius over a grid of initial radii and loss fractions.
    Sweep(Common),
    /// Plan one circle-to-circle transition.
    Path(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario file (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` in the file.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Coverage grid spacing in meters.
    #[arg(long)]
    grid_pitch: Option<f64>,
    /// Loiter phases sampled for instantaneous coverage.
    #[arg(long)]
    phase_samples: Option<usize>,
    /// Which variant of the packing table to write.
    #[arg(long, value_enum)]
    table1_mode: Option<Table1ModeName>,
}

#[derive(Debug)]
pub enum CliError {
    Config(anyhow::Error),
    Infeasible(String),
    Planning(String),
    Io(anyhow::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Planning(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "config error: {e:#}"),
            CliError::Infeasible(m) => write!(f, "infeasible: {m}"),
            CliError::Planning(m) => write!(f, "planning error: {m}"),
            CliError::Io(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<loiter_core::Error> for CliError {
    fn from(e: loiter_core::Error) -> Self {
        match e {
            loiter_core::Error::Domain(m) => CliError::Config(anyhow::anyhow!(m)),
            loiter_core::Error::Infeasible(m) => CliError::Infeasible(m),
            loiter_core::Error::Planning(m) => CliError::Planning(m),
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (Command::Pack(c) | Command::Optimize(c) | Command::Simulate(c) | Command::Sweep(c) | Command::Path(c)) =
        &cli.command;
    let ov = Overrides {
        out: c.out.clone(),
        seed: c.seed,
        grid_pitch: c.grid_pitch,
        phase_samples: c.phase_samples,
        table1_mode: c.table1_mode,
    };
    let s = Scenario::load(&c.config, &ov).map_err(CliError::Config)?;
    match cli.command {
        Command::Pack(_) => commands::pack_cmd(&s),
        Command::Optimize(_) => commands::optimize_cmd(&s),
        Command::Simulate(_) => commands::simulate_cmd(&s),
        Command::Sweep(_) => commands::sweep_cmd(&s),
        Command::Path(_) => commands::path_cmd(&s),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("loiter: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

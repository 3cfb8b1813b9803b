//! Batch front-end for the PXP ladder engine.
//!
//! Every data file is accompanied by a `<file>.json` sidecar recording the
//! resolved configuration, its hash and the run diagnostics.

mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Common;
use pxp::PxpError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Tolerance(String),
    #[error(transparent)]
    Core(#[from] PxpError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 2 configuration, 3 capacity, 4 numerical tolerance, 1 anything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Tolerance(_) => 4,
            CliError::Io(_) => 1,
            CliError::Core(e) => match e {
                PxpError::CapacityExceeded { .. } => 3,
                PxpError::DriftExceeded { .. } | PxpError::TraceNotNormalized { .. } => 4,
                PxpError::Io(_) => 1,
                _ => 2,
            },
        }
    }

    fn kind(&self) -> &'static str {
        match self.exit_code() {
            2 => "config",
            3 => "capacity",
            4 => "tolerance",
            _ => "io",
        }
    }
}

#[derive(Parser)]
#[command(name = "pxp", version, about = "Exact diagonalization and quenches of the staggered-detuning PXP ladder")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Hilbert-space and zero-momentum sector dimensions.
    Dims(Common),
    /// Full spectrum and eigenstate Shannon entropies.
    Spectrum(Common),
    /// Time evolution from product states.
    Quench(commands::QuenchArgs),
    /// Diagonal-ensemble imbalances over a Δ grid.
    ImbalanceSweep(commands::SweepArgs),
    /// Simultaneous zero modes of both Hamiltonian terms.
    ZeroModes(Common),
    /// Single-plaquette closed forms.
    Plaquette(commands::PlaquetteArgs),
    /// Eigenstate entanglement entropies for both cuts.
    Entanglement(Common),
    /// Scar towers and overlap profiles.
    Towers(Common),
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Dims(c) => commands::dims(&c),
        Command::Spectrum(c) => commands::spectrum(&c),
        Command::Quench(a) => commands::quench(&a),
        Command::ImbalanceSweep(a) => commands::imbalance_sweep(&a),
        Command::ZeroModes(c) => commands::zero_modes(&c),
        Command::Plaquette(a) => commands::plaquette(&a),
        Command::Entanglement(c) => commands::entanglement(&c),
        Command::Towers(c) => commands::towers(&c),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            eprintln!("error: code=2 kind=config message={first:?}");
            return ExitCode::from(2);
        }
        Err(e) => {
            // --help and --version.
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let message = e.to_string().replace('\n', " ");
            eprintln!("error: code={} kind={} message={message:?}", e.exit_code(), e.kind());
            ExitCode::from(e.exit_code())
        }
    }
}

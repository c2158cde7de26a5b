//! `varqlab` command-line front end.

mod commands;
mod config;
mod demo;
mod report;
mod verify;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::CliError;

#[derive(Parser)]
#[command(
    name = "varqlab",
    version,
    about = "Variational quantum algorithm laboratory"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Variational eigensolver.
    Vqe {
        #[command(subcommand)]
        action: VqeAction,
    },
    /// QAOA on a weighted graph or diagonal Hamiltonian.
    Qaoa {
        #[command(subcommand)]
        action: QaoaAction,
    },
    /// Partition a Hamiltonian into measurement groups.
    Group(commands::GroupArgs),
    /// Shot budgeting.
    Shots {
        #[command(subcommand)]
        action: ShotsAction,
    },
    /// Zero-noise extrapolation.
    Zne {
        #[command(subcommand)]
        action: ZneAction,
    },
    /// Exact ground energy of a Hamiltonian.
    Spectrum(commands::SpectrumArgs),
    /// Scripted experiments that reproduce reference numbers.
    Demo(demo::DemoArgs),
    /// Spot-check the simulator and algorithms against dense reference implementations.
    Verify(verify::VerifyArgs),
}

#[derive(Subcommand)]
enum VqeAction {
    Run(commands::VqeArgs),
}

#[derive(Subcommand)]
enum QaoaAction {
    Run(Box<commands::QaoaArgs>),
    /// Evaluate fixed angles on random regular graphs.
    Transfer(commands::TransferArgs),
}

#[derive(Subcommand)]
enum ShotsAction {
    /// Split a budget across measurement groups.
    Plan(commands::ShotPlanArgs),
    /// Shots needed for precision epsilon: M = K / epsilon^2.
    Required(commands::ShotsRequiredArgs),
    /// Three-stage shot schedule for an optimisation run.
    Schedule(commands::ScheduleArgs),
}

#[derive(Subcommand)]
enum ZneAction {
    Run(commands::ZneArgs),
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("VARQLAB_THREADS") else {
        return Ok(());
    };
    let threads: usize = match raw.trim().parse() {
        Ok(n) if n > 0 => n,
        _ => {
            return Err(CliError::config(format!(
                "VARQLAB_THREADS: expected a positive integer, got '{raw}'"
            )))
        }
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Runtime(e.into()))
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Vqe {
            action: VqeAction::Run(a),
        } => commands::vqe_run(a),
        Command::Qaoa {
            action: QaoaAction::Run(a),
        } => commands::qaoa_run(*a),
        Command::Qaoa {
            action: QaoaAction::Transfer(a),
        } => commands::qaoa_transfer(a),
        Command::Group(a) => commands::group(a),
        Command::Shots {
            action: ShotsAction::Plan(a),
        } => commands::shots_plan(a),
        Command::Shots {
            action: ShotsAction::Required(a),
        } => commands::shots_required(a),
        Command::Shots {
            action: ShotsAction::Schedule(a),
        } => commands::shots_schedule(a),
        Command::Zne {
            action: ZneAction::Run(a),
        } => commands::zne_run(a),
        Command::Spectrum(a) => commands::spectrum(a),
        Command::Demo(a) => demo::run(a),
        Command::Verify(a) => verify::run(a),
    }
}

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors, matching the config-error code.
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}

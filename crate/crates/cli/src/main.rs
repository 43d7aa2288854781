mod args;
mod commands;
mod error;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use error::CliError;

fn run(cli: Cli) -> Result<(), CliError> {
    let common = &cli.common;
    match cli.command {
        Command::Curve { n, grid } => commands::curve(common, n, grid as usize),
        Command::Cycle { system, bracket, fd_step } => commands::cycle(common, &system, (bracket[0], bracket[1]), fd_step),
        Command::Simulate { system, start, span, dt } => {
            commands::simulate(common, &system, (start[0], start[1]), span, dt)
        }
        Command::Verify { n_min, n_max, grid, samples } => {
            commands::verify(common, n_min, n_max, grid as usize, samples)
        }
        Command::Portrait { n, levels, points } => commands::portrait(common, n, &levels, points as usize),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

//! `cc-shoot` command-line interface.
//!
//! Exit status: 0 on success, 2 when `solve` finds no solution, 1 on any
//! error (including failed `verify` checks).

mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::Outcome;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Scan(a) => commands::scan(a),
        Command::Solve(a) => commands::solve(a),
        Command::Trace(a) => commands::trace(a),
        Command::Bounds(a) => commands::bounds(a),
        Command::Verify(a) => commands::verify(a),
    };
    match result {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::NoSolution) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

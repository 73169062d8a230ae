//! Command-line front end: `diagonalize`, `simulate` and `bench`.
//!
//! Exit codes: 0 success, 2 iteration cap reached, 64 usage or parse error,
//! 65 degenerate data, 74 output could not be written.

pub mod args;
pub mod commands;
pub mod io;

use std::ffi::OsString;

use clap::error::ErrorKind;
use clap::Parser;

pub use commands::{EXIT_DATA, EXIT_IO, EXIT_NO_CONVERGENCE, EXIT_OK, EXIT_USAGE};

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match args::Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    let result = match &cli.command {
        args::Command::Diagonalize(a) => commands::diagonalize(a),
        args::Command::Simulate(a) => commands::simulate(a),
        args::Command::Bench(a) => commands::bench(a),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

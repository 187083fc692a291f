//! Command-line surface of the evanescent-field toolkit.
//!
//! [`run_command`] parses an argument vector, runs one subcommand and maps
//! the outcome to an exit status: 0 on success, 1 for domain or I/O
//! failures and 2 for bad arguments. Messages go to standard error; data
//! goes to files in the `--out` directory only.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod experiment;
pub mod output;
pub mod plot;

use clap::error::ErrorKind;
use clap::Parser;

pub use config::ExperimentConfig;
pub use error::{CliError, CliResult};
pub use experiment::RunReport;

/// Runs the command line `argv` (program name first) and returns the exit status.
pub fn run_command<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    let cli = match commands::Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
        }
    };
    match commands::execute(cli, &argv) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

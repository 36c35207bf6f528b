//! The `kdecluster` command-line tool: `cluster`, `render`, `label`, `sql`
//! and `bench` subcommands.
//!
//! Exit codes: 0 success, 1 usage or config error, 2 I/O error, 3 data
//! error (empty or malformed input, unknown cluster).

pub mod bench;
pub mod commands;
pub mod config;
pub mod error;
pub mod svg;

use std::ffi::OsString;

use clap::Parser;

pub use commands::{run, Cli, Command};
pub use config::RunConfig;
pub use error::{CliError, CliResult, EXIT_DATA, EXIT_IO, EXIT_OK, EXIT_USAGE};

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(cli) {
        Ok(summary) => {
            if let Some(line) = summary {
                eprintln!("{line}");
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

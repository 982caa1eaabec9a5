//! Command-line front end for the `spinnet` library: single-graph queries,
//! multi-size sweeps and regressor training, with CSV or JSON output.

pub mod args;
pub mod error;
pub mod input;
pub mod output;
pub mod records;
pub mod run;

pub use error::{CliError, CliResult};
pub use records::export_records;

use clap::Parser;

/// Parses `args` (program name first) and runs the command; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match args::Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match run::run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("spinnet: {e}");
            e.exit_code()
        }
    }
}

//! The `drift` command-line tool and HTTP tuning service.
//!
//! [`run`] parses arguments and dispatches to a subcommand, returning the
//! process exit code: 0 on success, 1 on processing errors, 2 on usage errors.

pub mod cli;
pub mod presets;
pub mod render;
pub mod service;

use clap::Parser;
use std::ffi::OsString;

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let parsed = match cli::Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match cli::dispatch(parsed) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

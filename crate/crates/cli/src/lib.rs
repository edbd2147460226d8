//! Command-line front end for `lrscov-core`: estimation on user matrices or
//! data, threshold selection, and simulation benchmarks.
//!
//! Matrices and tables are CSV, scalar reports JSON. Every output is written
//! atomically and carries a [`RunManifest`] echoing the full configuration.

pub mod args;
pub mod commands;
pub mod error;
pub mod io;
pub mod manifest;
pub mod report;

pub use args::{Cli, Command};
pub use error::{CliError, Result};
pub use manifest::RunManifest;

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Estimate(a) => commands::estimate(a).map(|_| ()),
        Command::Grid(a) => commands::grid(a).map(|_| ()),
        Command::Simulate(a) => commands::simulate(a).map(|_| ()),
    }
}

//! Command-line driver: code construction, certificates, spectra and the
//! acceptance suite.

pub mod artifact;
pub mod cli;
pub mod commands;
pub mod error;
pub mod spec;
pub mod suite;

use cli::{Cli, Command};
use error::CliError;

/// # Errors
///
/// Returns the failure of the selected command.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    let c = &cli.common;
    match &cli.command {
        Command::Build(a) => commands::build(c, a),
        Command::Params(a) => commands::params(c, a),
        Command::Soundness(a) => commands::soundness(c, a),
        Command::Flow(a) => commands::flow(c, a),
        Command::Swt(a) => commands::swt(c, a),
        Command::Spectrum(a) => commands::spectrum(c, a),
        Command::Suite(a) => commands::suite(c, a),
    }
}

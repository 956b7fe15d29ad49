//! File formats and subcommands behind the `gspam` binary.

pub mod args;
pub mod commands;
pub mod error;
pub mod formats;

pub use error::{CliError, Result};

use args::{Cli, Command};

/// Runs one parsed command and returns its standard output.
pub fn run(cli: Cli) -> Result<String> {
    match cli.command {
        Command::Simulate(a) => commands::simulate(&a),
        Command::Fit(a) => commands::fit(&a),
        Command::Predict(a) => commands::predict(&a),
        Command::Path(a) => commands::path(&a),
        Command::Eval(a) => commands::eval(&a),
        Command::PlotComponents(a) => commands::plot_components(&a),
        Command::Reproduce(a) => commands::reproduce(&a),
    }
}

//! Command-line layer over the `dimer` crate: configuration, file formats and
//! one function per subcommand.

pub mod cli;
pub mod commands;
pub mod config;
pub mod contour;
pub mod error;
pub mod format;

use cli::{Cli, CommandKind};
use config::{RunConfig, Settings};
use error::CliResult;

/// Defaults, then the `--config` file, then the flags.
pub fn resolve(cli: &Cli) -> CliResult<(CommandKind, RunConfig)> {
    let (kind, args) = cli.command.split();
    let file = match &args.config {
        Some(path) => Settings::load(path)?,
        None => Settings::new(),
    };
    let merged = Settings::new().overlay(&file).overlay(&args.settings()?);
    Ok((kind, RunConfig::resolve(&merged)?))
}

pub fn run(cli: &Cli) -> CliResult<()> {
    let (kind, cfg) = resolve(cli)?;
    match kind {
        CommandKind::Contour => commands::cmd_contour(&cfg),
        CommandKind::Evolve => commands::cmd_evolve(&cfg),
        CommandKind::FixedPoints => commands::cmd_fixed_points(&cfg),
        CommandKind::Critical => commands::cmd_critical(&cfg),
        CommandKind::Fluct => commands::cmd_fluct(&cfg),
        CommandKind::Quantum => commands::cmd_quantum(&cfg),
        CommandKind::Sweep => commands::cmd_sweep(&cfg),
    }
}

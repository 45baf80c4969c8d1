//! Command-line front end: config parsing and the `bound`, `certify`,
//! `check` and `simulate` subcommands.

pub mod calls;
pub mod commands;
pub mod config;

use anyhow::{Context, Result};

pub use commands::{Cli, Command};
pub use config::{RawConfig, RunConfig};

/// Reads `ENDLAB_THREADS` (0 or unset = one worker per core).
pub fn configure_threads() -> Result<()> {
    let threads = match std::env::var("ENDLAB_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .with_context(|| format!("ENDLAB_THREADS must be a nonnegative integer, got {v:?}"))?,
        Err(_) => 0,
    };
    if threads > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    }
    Ok(())
}

/// Runs a parsed command and returns its exit status.
pub fn run(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Bound(a) => commands::bound(a),
        Command::Certify(a) => commands::certify(a),
        Command::Check(a) => commands::check(a),
        Command::Simulate(a) => commands::simulate(a),
    }
}

//! Command-line front end for `fieldnoise-core`.
//!
//! Every command writes its primary result to `--output` (or stdout), a
//! [`manifest::RunManifest`] describing the run, and human-readable
//! messages to stderr. Exit codes: 0 on success, 2 for input errors, 3 for
//! numerical failures.

pub mod args;
pub mod commands;
pub mod error;
pub mod grid;
pub mod manifest;
pub mod output;

use args::Cli;
use commands::Context;
use error::CliResult;
use output::Sink;

pub fn run(cli: Cli) -> CliResult<()> {
    let sink = Sink {
        output: cli.global.output.clone(),
        manifest: cli.global.manifest.clone(),
        quiet: cli.global.quiet,
    };
    let ctx = Context {
        global: cli.global,
        sink,
    };
    commands::dispatch(cli.command, &ctx)
}

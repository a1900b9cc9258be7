//! Command-line front end for `driftwalk-core`.
//!
//! [`dispatch`] parses an argument vector, runs one subcommand on a
//! [`Pooled`](exec::Pooled) executor and writes a JSON run record. Records
//! replay through [`record::to_argv`] or by passing them back as `--config`.

pub mod commands;
pub mod config;
pub mod error;
pub mod exec;
pub mod record;
mod selfcheck;

use std::ffi::OsString;
use std::io::Write;
use std::time::Instant;

use clap::Parser;

pub use commands::Cli;
pub use error::CliError;

use record::{RunRecord, VERSION};

/// Runs one command line and returns its exit code.
pub fn dispatch<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let argv = match config::expand(argv) {
        Ok(a) => a,
        Err(e) => return report(e, stderr),
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(sink, "{}", e.render());
            return e.exit_code();
        }
    };
    match execute(&cli, stdout, stderr) {
        Ok(code) => code,
        Err(e) => report(e, stderr),
    }
}

fn report(e: CliError, stderr: &mut dyn Write) -> i32 {
    let _ = writeln!(stderr, "error: {e}");
    e.exit_code()
}

fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    let started = Instant::now();
    let exec = exec::Pooled::from_env()?;
    let command = &cli.command;
    let outcome = command.run(&exec)?;
    let wall_time = started.elapsed().as_secs_f64();
    if let Some(path) = &command.io().out {
        outcome.table.write(path)?;
    }
    let record = RunRecord {
        command: command.name().into(),
        params: command.params(),
        result: outcome.result,
        seed: outcome.seed,
        version: VERSION,
        wall_time,
    };
    record.write_to(stdout)?;
    for w in &outcome.warnings {
        let _ = writeln!(stderr, "{w}");
    }
    Ok(outcome.exit_code)
}

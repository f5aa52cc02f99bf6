//! Command-line front end: frame-sequence ingestion, the `tfc`, `wtfr`,
//! `metrics`, `ffc` and `heatmap` subcommands, and their reports.
//!
//! Every command is a pure function of its input files and flags. Reports
//! carry the tool version and a hash of the effective configuration but no
//! timestamps or absolute paths, so reruns produce byte-identical outputs
//! for any thread count.

pub mod args;
pub mod commands;
pub mod error;
pub mod report;
pub mod sequence;

use std::io::Write;

pub use args::{Cli, Command};
pub use error::{CliError, Result};

/// Runs one parsed invocation on a dedicated thread pool.
pub fn run(cli: &Cli, out: &mut (dyn Write + Send)) -> Result<()> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        builder = builder.num_threads(n as usize);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {} threads: {e}", cli.threads.unwrap_or(0))))?;
    pool.install(|| match &cli.command {
        Command::Tfc(a) => commands::cmd_tfc(a, out),
        Command::Wtfr(a) => commands::cmd_wtfr(a, out),
        Command::Metrics(a) => commands::cmd_metrics(a, out),
        Command::Ffc(a) => commands::cmd_ffc(a, out),
        Command::Heatmap(a) => commands::cmd_heatmap(a, out),
    })
}

/// Parses `argv`, runs it, and returns the process exit code.
pub fn main_with_args<I, T>(argv: I, out: &mut (dyn Write + Send), err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    use clap::Parser;
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                error::EXIT_USAGE
            } else {
                error::EXIT_OK
            };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    match run(&cli, out) {
        Ok(()) => error::EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "freqtc: {e}");
            e.exit_code()
        }
    }
}

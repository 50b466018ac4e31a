//! Command-line driver for `mockalpha-core`: configuration, the series and
//! curve file formats, and JSON/CSV/text reports.
//!
//! Exit codes: 0 success, 1 input or I/O error, 2 inadmissible context,
//! 3 certificate failure, 4 precision exhaustion, 64 usage error.

pub mod commands;
pub mod config;
pub mod curves;
pub mod report;
pub mod seriesfile;

use clap::Parser;
use commands::Failure;
use config::{Cli, RunConfig};
use std::ffi::OsString;

fn emit(cfg: &RunConfig, text: &str) -> anyhow::Result<()> {
    match &cfg.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| anyhow::anyhow!("cannot write {}: {e}", path.display())),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            Ok(out.flush()?)
        }
    }
}

/// Runs one command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { Failure::Usage(String::new()).exit_code() } else { 0 };
        }
    };
    let cfg = match RunConfig::from_cli(cli) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("error: {msg}");
            return Failure::Usage(msg).exit_code();
        }
    };
    let outcome = match commands::dispatch(&cfg) {
        Ok(o) => o,
        Err(f) => {
            eprintln!("error: {f}");
            return f.exit_code();
        }
    };
    let written = outcome
        .output
        .render(cfg.format)
        .and_then(|text| emit(&cfg, &text));
    if let Err(e) = written {
        eprintln!("error: {e}");
        return 1;
    }
    for f in &outcome.failures {
        eprintln!("failed: {f}");
    }
    if outcome.failures.is_empty() {
        0
    } else {
        Failure::Certificate(String::new()).exit_code()
    }
}

use clap::{Parser, Subcommand, ValueEnum};
use mockalpha_core::cmforms::is_prime;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
    /// Series file (coeffs only).
    Series,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// alpha_g at one (curve, p) by both routes, with every certificate.
    Alpha,
    /// The eight-cell acceptance matrix plus one deep run.
    Matrix,
    /// Newform coefficients a(0..=T), checked against point counts.
    Coeffs,
    /// The lattice constant S, archimedean and p-adic.
    Snumber,
    /// Honda, integrality, group-law and crystalline checks.
    Checks,
    /// Shadow decomposition of a q-series read from a file.
    Decompose,
}

fn parse_prime(s: &str) -> Result<u64, String> {
    let p: u64 = s.parse().map_err(|_| format!("'{s}' is not an integer"))?;
    if p < 5 || !is_prime(p) {
        return Err(format!("{p} is not a prime >= 5"));
    }
    Ok(p)
}

#[derive(Debug, Parser)]
#[command(name = "mockalpha", version, about = "p-adic mock modular constants of CM newforms")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Curve label from the curve table.
    #[arg(long, global = true)]
    pub curve: Option<String>,
    /// JSON file whose rows override or extend the built-in curve table.
    #[arg(long = "curve-json", global = true, value_name = "PATH")]
    pub curve_json: Option<PathBuf>,
    /// Prime, at least 5.
    #[arg(long, global = true, value_parser = parse_prime)]
    pub p: Option<u64>,
    /// Depth K (at least 1).
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..))]
    pub depth: Option<u32>,
    /// Truncation override.
    #[arg(long = "T", global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub trunc: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..))]
    pub threads: Option<u32>,
    /// Seed for sampled numeric checks.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Series file (decompose).
    #[arg(long, global = true, value_name = "PATH")]
    pub file: Option<PathBuf>,
}

/// Validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub curve: Option<String>,
    pub curve_json: Option<PathBuf>,
    pub p: Option<u64>,
    pub depth: Option<u32>,
    pub trunc: Option<usize>,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub threads: usize,
    pub seed: u64,
    pub file: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_cli(c: Cli) -> Result<Self, String> {
        let default_format = match c.command {
            Command::Coeffs => Format::Series,
            _ => Format::Json,
        };
        let format = c.format.unwrap_or(default_format);
        if format == Format::Series && c.command != Command::Coeffs {
            return Err("--format series is only available for coeffs".into());
        }
        let threads = c.threads.map(|t| t as usize).unwrap_or_else(|| {
            std::thread::available_parallelism().map_or(1, |n| n.get())
        });
        let trunc = c
            .trunc
            .map(|t| usize::try_from(t).map_err(|_| "--T is too large".to_string()))
            .transpose()?;
        Ok(RunConfig {
            command: c.command,
            curve: c.curve,
            curve_json: c.curve_json,
            p: c.p,
            depth: c.depth,
            trunc,
            format,
            out: c.out,
            threads,
            seed: c.seed,
            file: c.file,
        })
    }
}

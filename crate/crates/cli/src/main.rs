//! `torelli`: enumerate strata, compute local rings, check plumbing
//! expansions and tabulate product-locus intersections.
//!
//! Exit codes: 0 success, 2 usage or input error, 3 failed verification.

mod commands;
mod manifest;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use thiserror::Error;
use torelli_core::json::stratum_from_json;

use manifest::{sha256_hex, Cache, Request, RunManifest};

const EXIT_USAGE: u8 = 2;
const EXIT_VERIFY: u8 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Dot,
    Tsv,
    Text,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Dot => "dot",
            Format::Tsv => "tsv",
            Format::Text => "text",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "torelli", version, about = "Strata, local rings and plumbing expansions for the Torelli pullback")]
struct Cli {
    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Ignore and do not update the result cache.
    #[arg(long, global = true)]
    no_cache: bool,
    /// Write the run manifest (JSON) to this path.
    #[arg(long, global = true, value_name = "PATH")]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List the colored strata for a genus and an ordered part tuple (json, dot).
    Strata {
        #[arg(long)]
        g: u32,
        #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
        parts: Vec<u32>,
        /// Identify strata that differ by permuting equal parts.
        #[arg(long)]
        dedup_unordered: bool,
    },
    /// Local ring of a stratum file: generators, minimal primes, reducedness (text, json).
    LocalRing { file: PathBuf },
    /// Expand the varied differential at TARGET for Omega at SOURCE and verify the refinement (text, json).
    Expand {
        file: PathBuf,
        #[arg(long)]
        source: String,
        #[arg(long)]
        target: String,
        /// Highest order r' to compute.
        #[arg(long)]
        order: u32,
        /// 1-based index of Omega in the basis at SOURCE.
        #[arg(long)]
        index: Option<u32>,
        /// Per-variable truncation of the smoothing parameters (default order + 1).
        #[arg(long)]
        s_trunc: Option<u32>,
    },
    /// Tabulate part tuples with their codimension and vanishing class (tsv, json).
    Tuples {
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
        g_max: u64,
        /// Compare against the closed-form list; exit 3 on mismatch.
        #[arg(long)]
        check: bool,
        /// List every tuple with at least two parts, not only the nonvanishing ones.
        #[arg(long)]
        all: bool,
    },
    /// Specialization poset with components marked (dot, json).
    Poset {
        #[arg(long)]
        g: u32,
        #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
        parts: Vec<u32>,
    },
}

fn read_input(path: &PathBuf, request: &mut Request) -> Result<String, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    request.add_input(path, &bytes);
    String::from_utf8(bytes).map_err(|_| CliError::Input(format!("{}: not UTF-8", path.display())))
}

fn load_stratum(path: &PathBuf, request: &mut Request) -> Result<torelli_core::json::StratumFile, CliError> {
    let text = read_input(path, request)?;
    stratum_from_json(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn request_for(cli: &Cli, format: Format) -> Request {
    let (name, params) = match &cli.command {
        Command::Strata { g, parts, dedup_unordered } => {
            ("strata", json!({"g": g, "parts": parts, "dedupUnordered": dedup_unordered}))
        }
        Command::LocalRing { .. } => ("local-ring", json!({})),
        Command::Expand { source, target, order, index, s_trunc, .. } => (
            "expand",
            json!({"source": source, "target": target, "order": order, "index": index, "sTrunc": s_trunc}),
        ),
        Command::Tuples { g_max, check, all } => ("tuples", json!({"gMax": g_max, "check": check, "all": all})),
        Command::Poset { g, parts } => ("poset", json!({"g": g, "parts": parts})),
    };
    let mut params = params;
    params["format"] = json!(format.name());
    Request::new(name, params)
}

fn default_format(command: &Command) -> Format {
    match command {
        Command::Strata { .. } => Format::Json,
        Command::LocalRing { .. } | Command::Expand { .. } => Format::Text,
        Command::Tuples { .. } => Format::Tsv,
        Command::Poset { .. } => Format::Dot,
    }
}

fn execute(cli: &Cli, format: Format, request: &mut Request) -> Result<commands::Outcome, CliError> {
    match &cli.command {
        Command::Strata { g, parts, dedup_unordered } => commands::strata(*g, parts, *dedup_unordered, format),
        Command::LocalRing { file } => commands::local_ring_cmd(&load_stratum(file, request)?, format),
        Command::Expand { file, source, target, order, index, s_trunc } => {
            let stratum = load_stratum(file, request)?;
            let args = commands::ExpandArgs { source, target, order: *order, index: *index, s_trunc: *s_trunc };
            commands::expand(&stratum, &args, format)
        }
        Command::Tuples { g_max, check, all } => commands::tuples(*g_max, *check, *all, format),
        Command::Poset { g, parts } => commands::poset(*g, parts, format),
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let started = Instant::now();
    let format = cli.format.unwrap_or_else(|| default_format(&cli.command));
    let mut request = request_for(&cli, format);
    let cache = Cache::from_env(cli.no_cache);

    // Inputs must be hashed before the cache can be consulted.
    if let Command::LocalRing { file } | Command::Expand { file, .. } = &cli.command {
        read_input(file, &mut request)?;
    }
    let (stdout, code, cached) = match cache.as_ref().and_then(|c| c.load(&request)) {
        Some(hit) => (hit.stdout, hit.exit_code as u8, true),
        None => {
            let outcome = execute(&cli, format, &mut request)?;
            let code = if outcome.passed { 0 } else { EXIT_VERIFY };
            (outcome.stdout, code, false)
        }
    };
    let manifest = RunManifest {
        request,
        output_digest: sha256_hex(stdout.as_bytes()),
        exit_code: code as i32,
        duration: started.elapsed(),
        cached,
    };
    if let (Some(cache), false) = (&cache, cached) {
        cache.store(&manifest, &stdout);
    }
    if let Some(path) = &cli.manifest {
        fs::write(path, manifest.to_json().to_string() + "\n")
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    }
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(stdout.as_bytes());
    let _ = out.flush();
    Ok(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            let kind = match e {
                CliError::Usage(_) => "usage error",
                CliError::Input(_) => "input error",
            };
            eprintln!("torelli: {kind}: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

//! `moyal`: batch kernels, deformation checks, Wigner functions, star
//! products and convergence sweeps from the command line.
//!
//! Exit status: 0 on success, 1 on usage, validation or I/O errors, 2 on a
//! numerical failure (any warning counts under `--strict`).

mod commands;
mod config;
mod error;
mod parse;

use std::fs;
use std::path::Path;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;

use commands::Outcome;
use config::{CommonArgs, RunConfig};
use error::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(name = "moyal", version, about = "Phase-space star products and deformation checks")]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
enum Command {
    /// Three-point kernel at one triple or a batch
    Kernel(commands::KernelArgs),
    /// n²-insertion ratio against the analytic form, per triple
    VerifyDeformation(commands::DeformationArgs),
    /// Wigner function of a state on the grid
    Wigner(commands::WignerArgs),
    /// Weyl symbol of an operator on the grid
    Symbol(commands::SymbolArgs),
    /// Star product or bracket of two symbols
    Star(commands::StarArgs),
    /// K-product identities on seeded random matrices
    Kproduct(commands::KproductArgs),
    /// Deformed-oscillator commutator or amplitude evolution
    Fosc(commands::FoscArgs),
    /// Result against dimension and damping schedule
    Convergence(commands::ConvergenceArgs),
}

impl Command {
    fn run(&self, cfg: &RunConfig) -> CliResult<Outcome> {
        match self {
            Self::Kernel(a) => commands::kernel(a, cfg),
            Self::VerifyDeformation(a) => commands::verify_deformation(a, cfg),
            Self::Wigner(a) => commands::wigner_cmd(a, cfg),
            Self::Symbol(a) => commands::symbol(a, cfg),
            Self::Star(a) => commands::star(a, cfg),
            Self::Kproduct(a) => commands::kproduct(a, cfg),
            Self::Fosc(a) => commands::fosc(a, cfg),
            Self::Convergence(a) => commands::convergence(a, cfg),
        }
    }
}

/// Written after every run, successful or not. No timestamps, so identical
/// runs give identical files.
#[derive(Serialize)]
struct Provenance<'a> {
    tool: &'static str,
    version: &'static str,
    core_version: &'static str,
    command: &'a Command,
    config: Option<&'a RunConfig>,
    seed: Option<u64>,
    outputs: Vec<String>,
    warnings: &'a [String],
    summary: &'a Value,
    exit_code: u8,
    error: Option<String>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };

    let (cfg, result) = match cli.common.resolve() {
        Ok(c) => {
            let r = cli.command.run(&c);
            (Some(c), r)
        }
        Err(e) => (None, Err(e)),
    };
    let strict = cfg.as_ref().is_some_and(|c| c.strict);
    let (outcome, failure) = match result {
        Ok(o) if strict && !o.warnings.is_empty() => {
            let w = o.warnings.clone();
            (o, Some(CliError::Strict(w)))
        }
        Ok(o) => (o, None),
        Err(e) => (Outcome::default(), Some(e)),
    };
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    let code = failure.as_ref().map_or(0, CliError::exit_code);
    if let Some(e) = &failure {
        eprintln!("error: {e}");
    }

    let prov_path = match &cfg {
        Some(c) => c.provenance_path(),
        None => RunConfig {
            out: cli.common.out.clone(),
            provenance: cli.common.provenance.clone(),
            ..Default::default()
        }
        .provenance_path(),
    };
    let record = Provenance {
        tool: "moyal",
        version: env!("CARGO_PKG_VERSION"),
        core_version: moyal_core::VERSION,
        command: &cli.command,
        config: cfg.as_ref(),
        seed: cfg.as_ref().map(|c| c.seed),
        outputs: outcome.outputs.iter().map(|p| p.display().to_string()).collect(),
        warnings: &outcome.warnings,
        summary: &outcome.summary,
        exit_code: code,
        error: failure.as_ref().map(ToString::to_string),
    };
    if let Err(e) = write_provenance(&prov_path, &record) {
        eprintln!("error: {e}");
        return ExitCode::from(code.max(1));
    }
    ExitCode::from(code)
}

fn write_provenance(path: &Path, record: &Provenance) -> CliResult<()> {
    let body = serde_json::to_string_pretty(record).expect("provenance is JSON") + "\n";
    fs::write(path, body).map_err(|e| CliError::io(path, e))
}

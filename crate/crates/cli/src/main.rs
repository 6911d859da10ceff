//! `ultrabeta`: verify ultra-beta closed forms, sample Rayleigh triangles and
//! compare them with random-matrix spectra.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod defaults;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use ultrabeta::integrands::{Family, GroundField};

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 20_240_917;

#[derive(Debug, Parser)]
#[command(
    name = "ultrabeta",
    version,
    about = "Ultra-beta integrals over Rayleigh triangles"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Write the primary output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Write marginal histograms as CSV to this path.
    #[arg(long, global = true)]
    pub emit_csv: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compare a numerical value of the integral with its closed form.
    Verify(VerifyArgs),
    /// Draw triangles from the exact chain sampler as newline-delimited JSON.
    Sample(SampleArgs),
    /// Check that projecting depth n+1 samples gives the depth n law.
    Projectivity(SampleArgs),
    /// Compare corner spectra of Gaussian matrices with the chain sampler.
    Corners(CornersArgs),
}

#[derive(Debug, Args)]
pub struct ChainArgs {
    #[arg(long, value_parser = parse_family)]
    pub family: Option<Family>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Parameter file in the JSON schema of `UltraBetaParams`.
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// θ used by the built-in parameter sets.
    #[arg(long, default_value_t = 1.0)]
    pub theta: f64,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub chain: ChainArgs,
    /// Verify the Selberg integral instead, e.g. `--selberg n=2 theta=1 sigma=1 tau=4`.
    #[arg(long, num_args = 1.., value_name = "KEY=VALUE")]
    pub selberg: Option<Vec<String>>,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Monte Carlo sample count when quadrature is not used.
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub chain: ChainArgs,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
}

#[derive(Debug, Args)]
pub struct CornersArgs {
    #[arg(long, value_parser = parse_field, default_value = "C")]
    pub field: GroundField,
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    /// Column count; compares row-block spectra of n×m matrices when given.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub psi: f64,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse().map_err(|e: ultrabeta::Error| e.to_string())
}

fn parse_field(s: &str) -> Result<GroundField, String> {
    s.parse().map_err(|e: ultrabeta::Error| e.to_string())
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Verify(_) => "verify",
            Command::Sample(_) => "sample",
            Command::Projectivity(_) => "projectivity",
            Command::Corners(_) => "corners",
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(w) = cli.workers {
        if w == 0 {
            eprintln!("--workers must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
        {
            eprintln!("cannot start worker pool: {e}");
            return ExitCode::from(2);
        }
    }
    let name = cli.command.name();
    match commands::run(&cli) {
        Ok(outcome) => {
            let report =
                json!({ "command": name, "pass": outcome.pass, "details": outcome.details });
            if let Err(e) = commands::emit_report(&cli, &report, outcome.report_to_stderr) {
                eprintln!("{e:#}");
                return ExitCode::from(2);
            }
            if outcome.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            let report =
                json!({ "command": name, "pass": false, "details": { "error": format!("{e:#}") } });
            println!("{report}");
            ExitCode::from(2)
        }
    }
}

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use commands::{KernelArgs, LemmaArgs, Outcome, SweepArgs, SweepRange};
use config::{ConfigFile, RunArgs, RunConfig, RUN_KEYS};

/// Two-solution laboratory for (-Δ)^{α/2} u = u^p + h on (-1, 1).
///
/// Exit status: 0 success, 1 negative result (certificate fails, a branch
/// is missing, a lemma check fails), 2 invalid input.
#[derive(Debug, Parser)]
#[command(name = "fraclap", version)]
struct Cli {
    /// Flat `key = value` file with defaults for any long flag
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate Green function, Poisson kernel or w(x, y) at point pairs
    Kernel(KernelArgs),
    /// Evaluate the two-solution certificate b |G h|^{p-1} < c_p
    Certify(RunArgs),
    /// Compute the minimal and the second solution
    Solve(RunArgs),
    /// Run the kernel and operator lemma battery
    Lemmas {
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        battery: LemmaArgs,
    },
    /// Sweep the forcing amplitude and locate the fold
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        range: SweepArgs,
    },
}

const LEMMA_KEYS: &[&str] = &["tol", "samples"];
const SWEEP_KEYS: &[&str] = &["lambda-lo", "lambda-hi", "steps", "rel-width", "scalar"];

fn load_config(path: &Option<PathBuf>, extra: &[&str]) -> Result<ConfigFile> {
    let keys: Vec<&str> = RUN_KEYS.iter().chain(extra).copied().collect();
    match path {
        Some(p) => ConfigFile::load(p, &keys),
        None => Ok(ConfigFile::default()),
    }
}

fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Kernel(args) => commands::kernel_cmd(args),
        Command::Certify(args) => {
            let file = load_config(&cli.config, &[])?;
            commands::certify_cmd(RunConfig::resolve(&args, &file)?)
        }
        Command::Solve(args) => {
            let file = load_config(&cli.config, &[])?;
            commands::solve_cmd(RunConfig::resolve(&args, &file)?)
        }
        Command::Lemmas { run, battery } => {
            let file = load_config(&cli.config, LEMMA_KEYS)?;
            let cfg = RunConfig::resolve(&run, &file)?;
            let tol = match battery.tol {
                Some(t) => Some(t),
                None => file.get("tol")?,
            };
            if let Some(t) = tol {
                anyhow::ensure!(t >= 0.0, "tolerance {t} must be nonnegative");
            }
            let samples = match battery.samples {
                Some(s) => s,
                None => file.get("samples")?.unwrap_or(100),
            };
            commands::lemmas_cmd(cfg, samples, tol)
        }
        Command::Sweep { run, range } => {
            let file = load_config(&cli.config, SWEEP_KEYS)?;
            let cfg = RunConfig::resolve(&run, &file)?;
            let range = SweepRange {
                lo: match range.lambda_lo {
                    Some(v) => v,
                    None => file.get("lambda-lo")?.unwrap_or(0.25),
                },
                hi: match range.lambda_hi {
                    Some(v) => v,
                    None => file.get("lambda-hi")?.unwrap_or(4.0),
                },
                steps: match range.steps {
                    Some(v) => v,
                    None => file.get("steps")?.unwrap_or(16),
                },
                rel_width: match range.rel_width {
                    Some(v) => Some(v),
                    None => file.get("rel-width")?,
                },
                scalar: range.scalar || file.flag("scalar")?,
            };
            commands::sweep_cmd(cfg, range)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Negative) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

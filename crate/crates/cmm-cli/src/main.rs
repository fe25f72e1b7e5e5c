//! `cmm`: batch front end for contextual measurement models.

mod commands;
mod error;
mod model_file;
mod record;

use clap::{Args, Parser, Subcommand, ValueEnum};
use error::CliError;

#[derive(Parser)]
#[command(
    name = "cmm",
    version,
    about = "Contextual measurement models: validation, diagnostics, interference, CHSH, entanglement, sampling"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Args)]
struct Common {
    /// Path to the model file (JSON).
    #[arg(long)]
    model: String,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the output to a file instead of stdout.
    #[arg(long)]
    out: Option<String>,
    /// Tolerance overrides, repeatable: --tol eps_oe=1e-6.
    #[arg(long = "tol", value_parser = parse_tolerance)]
    tol: Vec<(String, f64)>,
}

fn parse_tolerance(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| format!("expected name=value, got `{s}`"))?;
    let value: f64 = value
        .parse()
        .map_err(|e| format!("bad tolerance value in `{s}`: {e}"))?;
    Ok((name.to_string(), value))
}

#[derive(Subcommand)]
enum Command {
    /// Check every invariant of the model file and report residuals.
    Validate {
        #[command(flatten)]
        common: Common,
    },
    /// Run the feature checklist (FTP violation, order effect,
    /// replicability, RRE, OE+RRE, Bell bound) over a context sample.
    Diagnose {
        #[command(flatten)]
        common: Common,
        /// Comma-separated named contexts (default: the model's own sample).
        #[arg(long)]
        contexts: Option<String>,
        /// Seed for backends that draw their default sample or search.
        #[arg(long)]
        seed: Option<u64>,
        /// Random restarts for the CHSH maximizer row.
        #[arg(long, default_value_t = 16)]
        restarts: usize,
    },
    /// Interference term of the total-probability formula, optionally swept
    /// over a one-parameter family of pure states.
    Interference {
        #[command(flatten)]
        common: Common,
        /// Conditioning instrument (measures A).
        #[arg(long = "a")]
        instrument_a: String,
        /// Target observable B.
        #[arg(long = "b")]
        observable_b: String,
        /// Target outcome index of B (default: the last declared outcome).
        #[arg(long = "y")]
        outcome: Option<usize>,
        /// Context name for single-point evaluation.
        #[arg(long)]
        context: Option<String>,
        /// Number of sweep steps over psi(t) = cos(t)|0> + sin(t)|1>.
        #[arg(long)]
        sweep: Option<usize>,
    },
    /// CHSH: seeded maximizer over two-qubit configurations, or evaluation
    /// of a fixed instrument quadruple.
    Chsh {
        #[command(flatten)]
        common: Common,
        /// Seed (required for the maximizer).
        #[arg(long)]
        seed: Option<u64>,
        /// Random restarts for the maximizer.
        #[arg(long, default_value_t = 16)]
        restarts: usize,
        /// Restrict the maximizer to product states.
        #[arg(long)]
        separable: bool,
        /// Context name (evaluation mode).
        #[arg(long)]
        context: Option<String>,
        #[arg(long)]
        a1: Option<String>,
        #[arg(long)]
        a2: Option<String>,
        #[arg(long)]
        b1: Option<String>,
        #[arg(long)]
        b2: Option<String>,
        /// Skip the compatibility precondition and evaluate the sequential
        /// (A-then-B) correlations.
        #[arg(long)]
        force: bool,
    },
    /// Dependence, concurrence, and EPR pairing checks for one pair.
    Entangle {
        #[command(flatten)]
        common: Common,
        /// Context name.
        #[arg(long)]
        context: String,
        /// Conditioning instrument (measures A).
        #[arg(long = "a")]
        instrument_a: String,
        /// Target observable B.
        #[arg(long = "b")]
        observable_b: String,
        /// Custom pairing set as alpha:beta index pairs, e.g. "0:1,1:0"
        /// (default: both complete pairings of a dichotomous pair).
        #[arg(long)]
        gamma: Option<String>,
    },
    /// Draw outcome sequences; with --b, sequential pairs plus a
    /// combinability check against fresh single runs.
    Sample {
        #[command(flatten)]
        common: Common,
        /// Context name.
        #[arg(long)]
        context: String,
        /// Instrument to sample (measures A).
        #[arg(long = "a")]
        instrument_a: String,
        /// Second instrument for sequential sampling.
        #[arg(long = "b")]
        instrument_b: Option<String>,
        /// Number of trials.
        #[arg(long)]
        trials: usize,
        /// Seed (required: sampling is always randomized).
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not usage errors.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match run(cli) {
        Ok(()) => {}
        Err(err) => {
            for check in &err.checks {
                let status = if check.passed { "PASS" } else { "FAIL" };
                eprintln!(
                    "{status} {} (residual {:.3e})",
                    check.invariant, check.residual
                );
            }
            eprintln!("error: {}", err.message);
            std::process::exit(err.code);
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (payload, common) = match cli.command {
        Command::Validate { common } => (commands::validate(&common)?, common),
        Command::Diagnose {
            common,
            contexts,
            seed,
            restarts,
        } => (
            commands::diagnose(&common, contexts.as_deref(), seed, restarts)?,
            common,
        ),
        Command::Interference {
            common,
            instrument_a,
            observable_b,
            outcome,
            context,
            sweep,
        } => (
            commands::interference(
                &common,
                &instrument_a,
                &observable_b,
                outcome,
                context.as_deref(),
                sweep,
            )?,
            common,
        ),
        Command::Chsh {
            common,
            seed,
            restarts,
            separable,
            context,
            a1,
            a2,
            b1,
            b2,
            force,
        } => (
            commands::chsh(
                &common,
                seed,
                restarts,
                separable,
                context.as_deref(),
                [a1.as_deref(), a2.as_deref(), b1.as_deref(), b2.as_deref()],
                force,
            )?,
            common,
        ),
        Command::Entangle {
            common,
            context,
            instrument_a,
            observable_b,
            gamma,
        } => (
            commands::entangle(
                &common,
                &context,
                &instrument_a,
                &observable_b,
                gamma.as_deref(),
            )?,
            common,
        ),
        Command::Sample {
            common,
            context,
            instrument_a,
            instrument_b,
            trials,
            seed,
        } => (
            commands::sample(
                &common,
                &context,
                &instrument_a,
                instrument_b.as_deref(),
                trials,
                seed,
            )?,
            common,
        ),
    };
    match &common.out {
        Some(path) => std::fs::write(path, payload)?,
        None => print!("{payload}"),
    }
    Ok(())
}

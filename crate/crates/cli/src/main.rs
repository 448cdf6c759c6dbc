//! `wwm`: batch front-end for the phase-space toolkit.

mod billiard_cmd;
mod charts_cmd;
mod classical_cmd;
mod decohere_cmd;
mod inputs;
mod output;
mod quantum_cmd;
mod walkthrough;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use wwm_core::{Error, Result};

use output::Output;

#[derive(Parser)]
#[command(name = "wwm", version, about = "Weyl-Wigner-Moyal phase-space toolkit")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

/// Settings shared by every subcommand.
#[derive(Args, Debug, Clone, Serialize)]
pub struct Common {
    /// Output directory.
    #[arg(long, global = true, env = "WWM_OUT", default_value = "out")]
    pub out: PathBuf,
    #[arg(long, global = true, env = "WWM_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (0: one per core). Results do not depend on it.
    #[arg(long, global = true, env = "WWM_WORKERS", default_value_t = 0)]
    #[serde(skip)]
    pub workers: usize,
    #[arg(long, global = true, env = "WWM_HBAR", default_value_t = 1.0)]
    pub hbar: f64,
    /// Classical action scale S.
    #[arg(long, global = true, env = "WWM_ACTION_SCALE", default_value_t = 100.0)]
    pub action_scale: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Wigner symbol of an operator or oscillator eigenstate.
    Symb(quantum_cmd::SymbArgs),
    /// Weyl quantization of a polynomial symbol.
    Quantize(quantum_cmd::QuantizeArgs),
    /// Moyal star product of two phase functions.
    Star(quantum_cmd::StarArgs),
    /// Poisson or Moyal bracket of two phase functions.
    Bracket(quantum_cmd::BracketArgs),
    /// Mean value of a van Hove state over time and its decoherence time.
    Decohere(decohere_cmd::DecohereArgs),
    /// Build or verify an atlas of local constants.
    #[command(subcommand)]
    Charts(charts_cmd::ChartsCommand),
    /// Classical-limit density, ensemble and invariance test.
    Classical(classical_cmd::ClassicalArgs),
    /// Sinai billiard trajectory, domain table and Lyapunov exponent.
    Billiard(billiard_cmd::BilliardArgs),
    /// End-to-end demonstration scenarios.
    Walkthrough(walkthrough::WalkthroughArgs),
}

/// Runs one command; `Ok(Some(msg))` means artifacts were written but a check failed.
fn run(cli: Cli) -> Result<Option<String>> {
    let c = &cli.common;
    if !(c.hbar > 0.0) || !(c.action_scale > 0.0) {
        return Err(Error::Invalid("hbar and action scale must be positive".into()));
    }
    if c.hbar >= c.action_scale {
        log::warn!("hbar = {} is not below the action scale {}; atlas operations will be refused", c.hbar, c.action_scale);
    }
    if c.workers > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(c.workers).build_global().map_err(|e| Error::Invalid(e.to_string()))?;
    }
    let mut out = Output::new(&c.out);
    let mut failure = None;
    let (name, config) = match &cli.command {
        Command::Symb(a) => ("symb", quantum_cmd::symb(c, a, &mut out)?),
        Command::Quantize(a) => ("quantize", quantum_cmd::quantize(c, a, &mut out)?),
        Command::Star(a) => ("star", quantum_cmd::star(c, a, &mut out)?),
        Command::Bracket(a) => ("bracket", quantum_cmd::bracket(c, a, &mut out)?),
        Command::Decohere(a) => ("decohere", decohere_cmd::run(c, a, &mut out)?),
        Command::Charts(a) => charts_cmd::run(c, a, &mut out)?,
        Command::Classical(a) => ("classical", classical_cmd::run(c, a, &mut out)?),
        Command::Billiard(a) => ("billiard", billiard_cmd::run(c, a, &mut out)?),
        Command::Walkthrough(a) => {
            let (v, f) = walkthrough::run(c, a, &mut out)?;
            failure = f;
            ("walkthrough", v)
        }
    };
    let config = serde_json::json!({ "common": c, "args": config });
    for p in out.finish(name, config)? {
        log::info!("wrote {}", p.display());
    }
    Ok(failure)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) => 4,
        e if e.is_schema() => 2,
        _ => 3,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("WWM_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

//! Batch front end: `enumerate`, `sample`, `evolve` and `validate` runs
//! driven by a JSON configuration.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use qualia_core::exec::Execution;

pub use commands::{cmd_enumerate, cmd_evolve, cmd_sample, cmd_validate};
pub use config::RunConfig;
pub use error::{exit, CliError};

/// Environment variable overriding the worker thread count.
pub const THREADS_ENV: &str = "QUALIA_THREADS";

pub const DEFAULT_OUT: &str = "out";

#[derive(Debug, Parser)]
#[command(name = "qualia", version, about = "Collapse-lattice qualia simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact distribution by enumerating every history.
    Enumerate(RunArgs),
    /// Monte Carlo estimates with importance reweighting.
    Sample(RunArgs),
    /// Motif selection sweep over beta.
    Evolve(RunArgs),
    /// Invariant battery.
    Validate(RunArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Overrides `sampler.seed`.
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    /// Output directory; overrides `output` in the config.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Overrides `sampler.n_samples`.
    #[arg(long, value_name = "N")]
    pub samples: Option<usize>,
}

/// Reads the thread override and configures the worker pool.
pub fn execution_from_env() -> Result<Execution, CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(Execution::default());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    if threads == 1 {
        return Ok(Execution::Sequential);
    }
    #[cfg(feature = "parallel")]
    {
        // A second initialization in the same process is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    Ok(Execution::default())
}

/// Runs one subcommand and returns a one-line report.
pub fn run(cli: Cli) -> Result<String, CliError> {
    let exec = execution_from_env()?;
    let (Command::Enumerate(args) | Command::Sample(args) | Command::Evolve(args) | Command::Validate(args)) = &cli.command;
    let mut config = RunConfig::load(&args.config)?;
    config.apply_overrides(args.seed, args.samples);
    let out = args.out.clone().or_else(|| config.output.clone()).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let shown = out.display();
    Ok(match cli.command {
        Command::Enumerate(_) => {
            let s = cmd_enumerate(&config, &out, exec)?;
            format!("{} histories, {} distributions, C = {} -> {shown}", s.histories, s.distributions, s.normalizer)
        }
        Command::Sample(_) => {
            let s = cmd_sample(&config, &out, exec)?;
            let mut line = format!("{} samples, ESS {:.1} -> {shown}", s.n_samples, s.ess);
            if let Some(w) = s.warning {
                line.push_str(&format!("\nwarning: {w}"));
            }
            line
        }
        Command::Evolve(_) => {
            let s = cmd_evolve(&config, &out, exec)?;
            format!("{} beta values -> {shown}", s.results.len())
        }
        Command::Validate(_) => {
            let r = cmd_validate(&config, &out, exec)?;
            let lines: String = r.checks.iter().map(|c| format!("{:<18} {:?} {}\n", c.name, c.status, c.detail)).collect();
            format!("{lines}{} passed, {} skipped -> {shown}", r.passed, r.skipped)
        }
    })
}

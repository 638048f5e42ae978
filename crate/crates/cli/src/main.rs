//! `bohrc`: command-line front end for Beatty-sequence correlation experiments.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{exit_code, AnyResult, Outcome, Recipe};
use config::ExperimentConfig;

#[derive(Parser)]
#[command(name = "bohrc", version, about = "Logarithmic correlations of multiplicative functions along Beatty sequences")]
struct Cli {
    /// Worker threads; overrides `run.threads`.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Accepted for compatibility; runs are deterministic.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sieve λ(n) up to a limit and write the bit-packed cache.
    Sieve {
        #[arg(long)]
        limit: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the correlation described by a config.
    Correlate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Densities, trigonometric approximation and averaging checks for `[restriction]`.
    Bohr {
        #[arg(long)]
        config: PathBuf,
    },
    /// Build and exhaustively check the partition for the two configured factors.
    Partition {
        #[arg(long)]
        config: PathBuf,
    },
    /// Canned verification recipes.
    Verify {
        #[arg(value_enum)]
        recipe: Recipe,
        #[arg(long)]
        config: PathBuf,
    },
    /// k-point scaffold, floor identities and correlation.
    Kpoint {
        #[arg(long)]
        config: PathBuf,
    },
}

fn configure(path: &PathBuf, threads: Option<usize>) -> AnyResult<ExperimentConfig> {
    let cfg = ExperimentConfig::load(path)?;
    if let Some(b) = cfg.raw.run.memory_budget {
        std::env::set_var(bohr_chowla::multfunc::MEMORY_BUDGET_ENV, b.to_string());
    }
    init_threads(threads.or(cfg.raw.run.threads))?;
    Ok(cfg)
}

fn init_threads(n: Option<usize>) -> AnyResult<()> {
    if let Some(n) = n {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> AnyResult<Outcome> {
    let t = cli.threads;
    match &cli.command {
        Command::Sieve { limit, out } => {
            init_threads(t)?;
            commands::sieve(*limit, out)
        }
        Command::Correlate { config } => commands::run_correlate(&configure(config, t)?),
        Command::Bohr { config } => commands::run_bohr(&configure(config, t)?),
        Command::Partition { config } => commands::run_partition(&configure(config, t)?),
        Command::Verify { recipe, config } => commands::run_verify(*recipe, &configure(config, t)?),
        Command::Kpoint { config } => commands::run_kpoint(&configure(config, t)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(o) => {
            print!("{}", o.summary.render());
            ExitCode::from(exit_code(o.verdict) as u8)
        }
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(1)
        }
    }
}

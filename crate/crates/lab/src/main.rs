//! Command-line entry point. Every subcommand loads a JSON config, runs
//! its experiment suite, emits artifacts, and exits 0 only when all of
//! the suite's assertions pass.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use psgd_lab::config::RunConfig;
use psgd_lab::experiments::{self, shared};

#[derive(Parser)]
#[command(name = "psgd-lab", version, about = "Projected SGD stationarity laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output directory (overrides the config's `out`; default `./out`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Number of Monte Carlo seeds (overrides the config).
    #[arg(long, global = true)]
    seeds: Option<usize>,
    /// Master seed for the run fan-out (overrides the config).
    #[arg(long, global = true)]
    master_seed: Option<u64>,
    /// Worker threads for the seed fan-out (requires the parallel build).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Flow integrator substep (overrides the config).
    #[arg(long, global = true)]
    h: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Generic sweep: deviations, measures, and bound comparisons.
    Run { config: PathBuf },
    /// The scalar boundary example with competing measures.
    Example41 { config: PathBuf },
    /// Two-panel introductory figure reproduction.
    Fig1 { config: PathBuf },
    /// Rate sweep: formula exponents plus Monte Carlo validity.
    Rates { config: PathBuf },
    /// Diminishing-step decay checks.
    RobbinsMonro { config: PathBuf },
    /// Print and record the bound constants for a config.
    Constants { config: PathBuf },
}

impl Command {
    fn config_path(&self) -> &PathBuf {
        match self {
            Command::Run { config }
            | Command::Example41 { config }
            | Command::Fig1 { config }
            | Command::Rates { config }
            | Command::RobbinsMonro { config }
            | Command::Constants { config } => config,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<bool> {
    if let Some(threads) = cli.threads {
        configure_threads(threads);
    }
    let path = cli.command.config_path().clone();
    let mut cfg = RunConfig::load(&path)?;
    if let Some(seeds) = cli.seeds {
        cfg.seeds = seeds;
    }
    if let Some(master) = cli.master_seed {
        cfg.master_seed = master;
    }
    if let Some(h) = cli.h {
        cfg.flow_step = Some(h);
    }
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("out"));

    let checks = match &cli.command {
        Command::Run { .. } => experiments::run::execute(&cfg, &path, &out)?,
        Command::Example41 { .. } => experiments::example41::execute(&cfg, &path, &out)?,
        Command::Fig1 { .. } => experiments::fig1::execute(&cfg, &path, &out)?,
        Command::Rates { .. } => experiments::rates::execute(&cfg, &path, &out)?,
        Command::RobbinsMonro { .. } => experiments::robbins_monro::execute(&cfg, &path, &out)?,
        Command::Constants { .. } => experiments::constants_cmd::execute(&cfg, &path, &out)?,
    };
    let all_passed = shared::print_results(&checks);
    println!(
        "{}: {} of {} checks passed; artifacts in {}",
        if all_passed { "OK" } else { "FAILED" },
        checks.iter().filter(|c| c.passed).count(),
        checks.len(),
        out.display()
    );
    Ok(all_passed)
}

#[cfg(feature = "parallel")]
fn configure_threads(threads: usize) {
    if let Err(e) = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
    {
        eprintln!("warning: thread pool already initialized: {e}");
    }
}

#[cfg(not(feature = "parallel"))]
fn configure_threads(_threads: usize) {
    eprintln!("warning: --threads ignored; this binary was built without the parallel feature");
}

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use holo_cli::{run, write_outputs, Command, RunConfig};

#[derive(Parser)]
#[command(name = "holo-opt", version, about = "Holonomic gate pulse optimization, selection and robustness scans")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// JSON run configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: available parallelism)
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output directory
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand, Clone)]
enum Cmd {
    /// Minimize J_to, J_ar or J_dr with the genetic algorithm
    OptimizeSingle,
    /// Pareto front of (J_ar, J_dr) or (J_ar, J_dr, J_dcr) with NSGA-II
    OptimizeMulti,
    /// Entropy-weight choice of one point from a front file
    Select {
        /// Front file (overrides the config `front`)
        #[arg(long)]
        front: Option<PathBuf>,
    },
    /// Fidelity over an (epsilon, eta, kappa) grid
    Scan,
    /// Costs, geometric phase and waveform of one pulse
    Evaluate,
}

fn main_inner(cli: Cli) -> Result<()> {
    let path = cli.config.context("--config <file> is required")?;
    let mut cfg = RunConfig::load(&path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let command = match cli.command {
        Cmd::OptimizeSingle => Command::OptimizeSingle,
        Cmd::OptimizeMulti => Command::OptimizeMulti,
        Cmd::Select { front } => {
            if front.is_some() {
                cfg.front = front;
            }
            Command::Select
        }
        Cmd::Scan => Command::Scan,
        Cmd::Evaluate => Command::Evaluate,
    };
    if let Some(n) = cli.jobs {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring worker pool")?;
    }
    let out = run(command, &cfg)?;
    write_outputs(&cli.out, &out)?;
    for line in &out.summary {
        println!("{line}");
    }
    Ok(())
}

fn main() -> ExitCode {
    match main_inner(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

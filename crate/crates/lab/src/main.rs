use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kwise_lab::{config, execute, Config, Experiment, LabError};

#[derive(Parser)]
#[command(name = "kwise-lab", version, about = "Experiments for K-wise coupled Schrödinger systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scalar ground states, scaling laws and the 1-D soliton check.
    Scalar(RunArgs),
    /// S̄, C̄, the small-coupling thresholds and the reduced quotient.
    Thresholds(RunArgs),
    /// Nehari levels across positive couplings and the dichotomy crossing.
    Dichotomy(RunArgs),
    /// Strong-competition sweep over negative couplings.
    Sweep(RunArgs),
    /// The structured limit problem.
    Limit(RunArgs),
    /// Print the reference configuration with every default.
    Defaults {
        /// Write to this file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Configuration file; defaults apply when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the configured seeds with a single seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

fn run(experiment: Experiment, args: RunArgs) -> Result<(), LabError> {
    let mut cfg = match &args.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(seed) = args.seed {
        cfg.run.seeds = vec![seed];
    }
    for path in execute(experiment, &cfg, &args.out, args.jobs)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Scalar(a) => run(Experiment::Scalar, a),
        Command::Thresholds(a) => run(Experiment::Thresholds, a),
        Command::Dichotomy(a) => run(Experiment::Dichotomy, a),
        Command::Sweep(a) => run(Experiment::Sweep, a),
        Command::Limit(a) => run(Experiment::Limit, a),
        Command::Defaults { out } => {
            let text = config::reference();
            match out {
                Some(path) => std::fs::write(path, text).map_err(LabError::from),
                None => {
                    print!("{text}");
                    Ok(())
                }
            }
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("kwise-lab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

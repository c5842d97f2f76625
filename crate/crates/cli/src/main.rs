use std::path::PathBuf;
use std::process::ExitCode;

use beppo_cli::{run, Experiment, Invocation};
use clap::Parser;

/// Reproducible experiments on homogeneous Sobolev classes and whole-space
/// elliptic problems.
#[derive(Debug, Parser)]
#[command(name = "beppo", version)]
struct Cli {
    #[arg(value_enum)]
    experiment: Experiment,
    /// JSON config file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `out` in the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Random seed (overrides `seed` in the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for the parallel parts.
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("beppo: --threads must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("beppo: {e}");
            return ExitCode::from(1);
        }
    }
    let inv = Invocation {
        experiment: cli.experiment,
        config: cli.config,
        out: cli.out,
        seed: cli.seed,
        threads: cli.threads,
    };
    match run(&inv) {
        Ok(outcome) => {
            if let Some(e) = &outcome.error {
                eprintln!("beppo: {e}");
            }
            eprintln!("beppo: wrote {}", outcome.out.join("manifest.json").display());
            ExitCode::from(outcome.exit_code())
        }
        Err(e) => {
            eprintln!("beppo: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

//! Experiment runner for the beppo toolkit.

pub mod builtins;
pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod plot;

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::de::DeserializeOwned;
use serde_json::json;

use config::{Common, Source, DEFAULT_SEED};
pub use error::{Result, RunError};
pub use experiments::Experiment;
use output::Context;

/// Command-line arguments after parsing.
#[derive(Debug, Clone)]
pub struct Invocation {
    pub experiment: Experiment,
    pub config: PathBuf,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

/// Where a run wrote its artifacts and how it ended.
#[derive(Debug)]
pub struct Outcome {
    pub out: PathBuf,
    pub error: Option<RunError>,
}

impl Outcome {
    pub fn exit_code(&self) -> u8 {
        self.error.as_ref().map_or(0, RunError::exit_code)
    }
}

/// Runs one experiment. Config problems found before the output directory
/// exists are returned as `Err`; everything later is recorded in the
/// manifest and returned in the [`Outcome`].
pub fn run(inv: &Invocation) -> Result<Outcome> {
    let source = Source::read(&inv.config)?;
    match inv.experiment {
        Experiment::DensityDemo => execute(inv, &source, experiments::density_demo::run),
        Experiment::DenyLions => execute(inv, &source, experiments::deny_lions::run),
        Experiment::GrowthStudy => execute(inv, &source, experiments::growth_study::run),
        Experiment::EllipticityCheck => execute(inv, &source, experiments::ellipticity_check::run),
        Experiment::RhsCheck => execute(inv, &source, experiments::rhs_check::run),
        Experiment::Solve => execute(inv, &source, experiments::solve::run),
        Experiment::RegularityStudy => execute(inv, &source, experiments::regularity_study::run),
        Experiment::ConvergenceStudy => execute(inv, &source, experiments::convergence_study::run),
    }
}

fn execute<C: DeserializeOwned + Common>(
    inv: &Invocation,
    source: &Source,
    body: fn(&C, &mut Context) -> Result<()>,
) -> Result<Outcome> {
    let name = inv.experiment.name();
    if let Some(e) = source.value().get("experiment").and_then(|v| v.as_str()) {
        if e != name {
            return Err(source.error("experiment", format!("config is for `{e}`, not `{name}`")));
        }
    }
    let cfg: C = source.parse()?;
    let shift = cfg.shift();
    if !shift.is_finite() || shift.abs() > 1024.0 {
        return Err(source.error("shift", "must be finite with |shift| ≤ 1024"));
    }
    let out = inv
        .out
        .clone()
        .or_else(|| cfg.out().map(Path::to_path_buf))
        .unwrap_or_else(|| PathBuf::from("out").join(name));
    let seed = inv.seed.or(cfg.seed()).unwrap_or(DEFAULT_SEED);

    let start = Instant::now();
    let mut ctx = Context::new(source, out.clone(), seed, shift)?;
    let result = body(&cfg, &mut ctx);
    let wall = start.elapsed().as_secs_f64();
    let (outputs, summary) = ctx.finish();
    let error = result.err();
    let manifest = json!({
        "experiment": name,
        "version": env!("CARGO_PKG_VERSION"),
        "config_file": inv.config.display().to_string(),
        "config": source.value(),
        "effective": {
            "out": out.display().to_string(),
            "seed": seed,
            "shift": shift,
            "threads": rayon::current_num_threads(),
        },
        "wall_clock_seconds": wall,
        "status": if error.is_none() { "ok" } else { "failed" },
        "exit_code": error.as_ref().map_or(0, RunError::exit_code),
        "error": error.as_ref().map(ToString::to_string),
        "summary": summary,
        "outputs": outputs,
    });
    std::fs::write(
        out.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)? + "\n",
    )?;
    Ok(Outcome { out, error })
}

//! One elliptic problem, optionally repeated over several resolutions.

use beppo::solver::SolveReport;

use super::{case_grid, default_tol, label, solve_case, Case};
use crate::builtins;
use crate::config::{experiment_config, positive, GridConfig, Manufactured};
use crate::error::Result;
use crate::output::{num, Context};
use crate::plot::PlotKind;

fn yes() -> bool {
    true
}

experiment_config!(Config {
    grid: GridConfig,
    tensor: String,
    rhs: String,
    #[serde(default)]
    manufactured: Option<Manufactured>,
    #[serde(default = "default_tol")]
    tol: f64,
    /// Resolutions to run; the grid's own `n` when empty.
    #[serde(default)]
    n_values: Vec<usize>,
    /// Class used as the starting iterate of the iterative solvers.
    #[serde(default)]
    initial_guess: Option<String>,
    #[serde(default = "yes")]
    save_solution: bool,
});

pub fn run(cfg: &Config, ctx: &mut Context) -> Result<()> {
    let source = ctx.source;
    positive(source, "tol", cfg.tol)?;
    let case = Case {
        tensor: &cfg.tensor,
        rhs: &cfg.rhs,
        manufactured: cfg.manufactured.as_ref(),
    };
    let ns = if cfg.n_values.is_empty() {
        vec![cfg.grid.n]
    } else {
        cfg.n_values.clone()
    };
    let mut rows = Vec::new();
    let mut history = Vec::new();
    let mut last_error = None;
    for n in ns {
        let grid = case_grid(source, &cfg.grid.with_n(n), &case)?;
        let guess = match &cfg.initial_guess {
            Some(spec) => {
                let field = builtins::class_field(source, "initial_guess", spec, grid, ctx.seed)?;
                Some(builtins::class_input(&field, ctx.shift, 2.0)?)
            }
            None => None,
        };
        let solved = solve_case(source, grid, &case, cfg.tol, guess.as_ref())?;
        let error = solved.relative_error()?;
        let r: &SolveReport = &solved.report;
        rows.push(vec![
            n.to_string(),
            label(r.method),
            label(r.constants.provenance),
            r.iterations.to_string(),
            num(r.residual),
            num(r.energy),
            num(r.energy_defect),
            num(r.constants.c0),
            num(r.constants.c1),
            num(r.constants.cond_estimate),
            error.map(num).unwrap_or_default(),
        ]);
        for (i, e) in r.energies.iter().enumerate() {
            history.push(vec![n.to_string(), i.to_string(), num(*e)]);
        }
        if cfg.save_solution {
            ctx.field(&format!("solution_n{n}.bin"), r.solution.rep())?;
        }
        ctx.json(&format!("report_n{n}.json"), r)?;
        last_error = error;
    }
    let path = ctx.csv(
        "solve.csv",
        &[
            "n",
            "method",
            "provenance",
            "iterations",
            "residual",
            "energy",
            "energy_defect",
            "c0",
            "c1",
            "cond_estimate",
            "error",
        ],
        &rows,
    )?;
    let kind = if last_error.is_some() {
        PlotKind::Convergence
    } else {
        PlotKind::History
    };
    ctx.plot(&path, kind)?;
    let path = ctx.csv("energies.csv", &["n", "iteration", "energy"], &history)?;
    if !history.is_empty() {
        ctx.plot(&path, PlotKind::History)?;
    }
    if let Some(e) = last_error {
        ctx.summarize("relative_error", e);
    }
    Ok(())
}

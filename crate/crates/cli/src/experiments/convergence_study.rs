//! Manufactured-solution errors over a sequence of resolutions.

use serde::Deserialize;

use super::{case_grid, default_tol, solve_case, Case};
use crate::config::{experiment_config, non_empty, positive, GridConfig, Manufactured};
use crate::error::Result;
use crate::output::{num, Context};
use crate::plot::PlotKind;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyCase {
    pub tensor: String,
    pub manufactured: Manufactured,
}

fn yes() -> bool {
    true
}

experiment_config!(Config {
    grid: GridConfig,
    n_values: Vec<usize>,
    cases: Vec<StudyCase>,
    #[serde(default = "default_tol")]
    tol: f64,
    #[serde(default = "yes")]
    save_solutions: bool,
});

pub fn run(cfg: &Config, ctx: &mut Context) -> Result<()> {
    let source = ctx.source;
    non_empty(source, "n_values", &cfg.n_values)?;
    non_empty(source, "cases", &cfg.cases)?;
    positive(source, "tol", cfg.tol)?;
    let mut rows = Vec::new();
    let mut worst = Vec::new();
    for (index, sc) in cfg.cases.iter().enumerate() {
        let case = Case {
            tensor: &sc.tensor,
            rhs: "manufactured",
            manufactured: Some(&sc.manufactured),
        };
        let mut finest = f64::NAN;
        for &n in &cfg.n_values {
            let grid = case_grid(source, &cfg.grid.with_n(n), &case)?;
            let solved = solve_case(source, grid, &case, cfg.tol, None)?;
            let error = solved.relative_error()?.unwrap_or(f64::NAN);
            let r = &solved.report;
            rows.push(vec![
                index.to_string(),
                sc.tensor.clone(),
                n.to_string(),
                num(error),
                num(r.residual),
                r.iterations.to_string(),
            ]);
            if cfg.save_solutions {
                ctx.field(&format!("solution_c{index}_n{n}.bin"), r.solution.rep())?;
            }
            finest = error;
        }
        worst.push(finest);
    }
    let path = ctx.csv(
        "convergence.csv",
        &["case", "tensor", "n", "error", "residual", "iterations"],
        &rows,
    )?;
    ctx.plot(&path, PlotKind::Convergence)?;
    ctx.summarize("finest_errors", worst);
    Ok(())
}

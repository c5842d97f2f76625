//! Second- and third-order bounds for computed solutions.

use beppo::solver::{regularity_check, DirectionCheck};
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
    pub rhs: String,
    #[serde(default)]
    pub manufactured: Option<Manufactured>,
}

experiment_config!(Config {
    grid: GridConfig,
    cases: Vec<StudyCase>,
    #[serde(default = "default_tol")]
    tol: f64,
});

fn check_row(case: usize, kind: &str, c: &DirectionCheck) -> Vec<String> {
    let dirs: Vec<String> = c.directions.iter().map(|d| d.to_string()).collect();
    vec![
        case.to_string(),
        kind.to_string(),
        dirs.join(" "),
        num(c.measured),
        num(c.bound),
        num(c.margin),
    ]
}

pub fn run(cfg: &Config, ctx: &mut Context) -> Result<()> {
    let source = ctx.source;
    non_empty(source, "cases", &cfg.cases)?;
    positive(source, "tol", cfg.tol)?;
    let mut checks = Vec::new();
    let mut norms = Vec::new();
    let mut all_ok = true;
    for (index, sc) in cfg.cases.iter().enumerate() {
        let case = Case {
            tensor: &sc.tensor,
            rhs: &sc.rhs,
            manufactured: sc.manufactured.as_ref(),
        };
        let grid = case_grid(source, &cfg.grid, &case)?;
        let solved = solve_case(source, grid, &case, cfg.tol, None)?;
        let rep = regularity_check(&solved.tensor, &solved.rhs, &solved.report.solution)
            .map_err(|e| match e {
                beppo::Error::Unresolved { .. } => source.error("tensor", e),
                other => other.into(),
            })?;
        for c in &rep.second {
            checks.push(check_row(index, "second", c));
        }
        checks.push(check_row(index, "second-total", &rep.second_total));
        for c in &rep.third {
            checks.push(check_row(index, "third", c));
        }
        for c in &rep.third_derived {
            checks.push(check_row(index, "third-derived", c));
        }
        let m = rep.measured_norms;
        all_ok &= rep.h2_bound_ok && rep.h3_bound_ok;
        norms.push(vec![
            index.to_string(),
            sc.tensor.clone(),
            sc.rhs.clone(),
            num(m.c0),
            num(m.grad_u),
            num(m.hess_u),
            num(m.third_u),
            num(m.f),
            num(m.grad_f),
            num(m.dc_sup),
            num(m.dc_l2),
            num(m.d2c_sup),
            rep.h2_bound_ok.to_string(),
            rep.h3_bound_ok.to_string(),
            rep.h3_derived_ok.to_string(),
        ]);
    }
    ctx.csv(
        "regularity.csv",
        &["case", "check", "directions", "measured", "bound", "margin"],
        &checks,
    )?;
    let path = ctx.csv(
        "norms.csv",
        &[
            "case",
            "tensor",
            "rhs",
            "c0",
            "grad_u",
            "hess_u",
            "third_u",
            "f",
            "grad_f",
            "dc_sup",
            "dc_l2",
            "d2c_sup",
            "h2_bound_ok",
            "h3_bound_ok",
            "h3_derived_ok",
        ],
        &norms,
    )?;
    ctx.plot(&path, PlotKind::History)?;
    ctx.summarize("bounds_hold", all_ok);
    Ok(())
}

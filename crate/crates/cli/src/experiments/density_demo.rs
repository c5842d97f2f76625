//! Cut-off approximations `u_n = η(|x|/n)(u − (u)_{A_n})` of one class.

use beppo::quotient::density_sequence;

use crate::builtins;
use crate::config::{experiment_config, non_empty, positive, GridConfig};
use crate::error::Result;
use crate::output::{num, Context};
use crate::plot::PlotKind;

fn two() -> f64 {
    2.0
}

experiment_config!(Config {
    grid: GridConfig,
    field: String,
    #[serde(default = "two")]
    p: f64,
    cutoffs: Vec<f64>,
});

pub fn run(cfg: &Config, ctx: &mut Context) -> Result<()> {
    let source = ctx.source;
    non_empty(source, "cutoffs", &cfg.cutoffs)?;
    for &n in &cfg.cutoffs {
        positive(source, "cutoffs", n)?;
    }
    let grid = cfg.grid.build(source, "grid", 1)?;
    let field = builtins::class_field(source, "field", &cfg.field, grid, ctx.seed)?;
    let class = builtins::class_input(&field, ctx.shift, cfg.p).map_err(|e| source.error("p", e))?;
    let mut rows = Vec::new();
    let mut max_ratio = 0.0f64;
    for &n in &cfg.cutoffs {
        let step = density_sequence(&class, n).map_err(|e| source.error("cutoffs", e))?;
        max_ratio = max_ratio.max(step.ratio());
        rows.push(vec![
            num(n),
            num(step.gradient_error),
            num(step.tail_norm),
            num(step.ratio()),
        ]);
    }
    let path = ctx.csv("density.csv", &["n", "gradient_error", "tail_norm", "ratio"], &rows)?;
    ctx.plot(&path, PlotKind::Scaling)?;
    ctx.summarize("max_ratio", max_ratio);
    ctx.summarize("seminorm", class.seminorm());
    Ok(())
}

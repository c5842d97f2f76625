//! Closed-form 1-d sequences: the Deny–Lions example and the `d = 1`
//! density counterexample.

use beppo::quotient::{d1_counterexample, deny_lions_example};
use serde::Deserialize;

use crate::config::{experiment_config, non_empty, Source};
use crate::error::Result;
use crate::output::{num, Context};
use crate::plot::PlotKind;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Counterexample {
    #[serde(default = "unit_interval")]
    pub interval: [f64; 2],
    pub n_values: Vec<u64>,
    pub p_values: Vec<f64>,
}

fn unit_interval() -> [f64; 2] {
    [0.0, 1.0]
}

fn two() -> f64 {
    2.0
}

experiment_config!(Config {
    n_values: Vec<u64>,
    #[serde(default = "two")]
    p: f64,
    #[serde(default)]
    counterexample: Option<Counterexample>,
});

fn validate(cfg: &Config, source: &Source) -> Result<()> {
    non_empty(source, "n_values", &cfg.n_values)?;
    if cfg.n_values.contains(&0) {
        return Err(source.error("n_values", "n must be at least 1"));
    }
    if let Some(ce) = &cfg.counterexample {
        non_empty(source, "n_values", &ce.n_values)?;
        non_empty(source, "p_values", &ce.p_values)?;
        if ce.n_values.contains(&0) {
            return Err(source.error("counterexample", "n must be at least 1"));
        }
        if !(ce.interval[0] < ce.interval[1]) {
            return Err(source.error("interval", "need a < b"));
        }
    }
    Ok(())
}

pub fn run(cfg: &Config, ctx: &mut Context) -> Result<()> {
    validate(cfg, ctx.source)?;
    let mut rows = Vec::new();
    for &n in &cfg.n_values {
        let e = deny_lions_example(n, cfg.p).map_err(|e| ctx.source.error("p", e))?;
        rows.push(vec![n.to_string(), num(e.sup_value), num(e.grad_norm)]);
    }
    let path = ctx.csv("deny_lions.csv", &["n", "sup", "grad_norm"], &rows)?;
    ctx.plot(&path, PlotKind::Scaling)?;

    if let Some(ce) = &cfg.counterexample {
        let [a, b] = ce.interval;
        let mut rows = Vec::new();
        for &p in &ce.p_values {
            for &n in &ce.n_values {
                let dist = d1_counterexample(a, b, n, p).map_err(|e| ctx.source.error("p_values", e))?;
                rows.push(vec![num(p), n.to_string(), num(dist)]);
            }
        }
        ctx.csv("counterexample.csv", &["p", "n", "distance"], &rows)?;
    }
    Ok(())
}

//! Growth of the smooth part `J∞u` and the `J∞ + J0` splitting.
//!
//! Each section present in the config is run: `decomposition` (random
//! band-limited classes under grid refinement), `power` (`p > d`), `log`
//! (`p = d`), `decay` (`p < d`) and `chain` (cube-chain oscillation).

use beppo::growth::{self, build_cube_chain, chain_oscillation};
use beppo::quotient::{decompose, Mollifier};
use beppo::{grid, testfields};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Deserialize;

use crate::builtins;
use crate::config::{experiment_config, non_empty, positive, GridConfig};
use crate::error::{Result, RunError};
use crate::output::{num, Context};
use crate::plot::PlotKind;

fn two() -> f64 {
    2.0
}

fn one() -> f64 {
    1.0
}

fn twelve() -> usize {
    12
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Decomposition {
    /// Coarsest grid; each refinement doubles `n`.
    pub grid: GridConfig,
    #[serde(default = "two_levels")]
    pub levels: usize,
    pub samples: usize,
    /// Band limit `|k| ≤ kmax` of the random classes.
    pub kmax: f64,
    #[serde(default = "one")]
    pub mollifier_radius: f64,
}

fn two_levels() -> usize {
    2
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Power {
    pub grid: GridConfig,
    pub p: f64,
    #[serde(default = "twelve")]
    pub radii: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Log {
    pub grid: GridConfig,
    /// Resolutions to compare; the grid's own `n` is used when empty.
    #[serde(default)]
    pub n_values: Vec<usize>,
    #[serde(default = "twelve")]
    pub radii: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Decay {
    pub grid: GridConfig,
    #[serde(default)]
    pub n_values: Vec<usize>,
    pub field: String,
    #[serde(default = "two")]
    pub p: f64,
    /// Shell radii for the far-field ratio, spread over `[L/4, L/2]`.
    #[serde(default = "five")]
    pub radii: usize,
}

fn five() -> usize {
    5
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Chain {
    pub grid: GridConfig,
    pub field: String,
    #[serde(default = "two")]
    pub p: f64,
    /// Distances `|x|` of the chain targets, placed on the main diagonal.
    pub targets: Vec<f64>,
}

experiment_config!(Config {
    #[serde(default)]
    decomposition: Option<Decomposition>,
    #[serde(default)]
    power: Option<Power>,
    #[serde(default)]
    log: Option<Log>,
    #[serde(default)]
    decay: Option<Decay>,
    #[serde(default)]
    chain: Option<Chain>,
});

fn levels(grid: &GridConfig, n_values: &[usize]) -> Vec<GridConfig> {
    if n_values.is_empty() {
        vec![*grid]
    } else {
        n_values.iter().map(|&n| grid.with_n(n)).collect()
    }
}

pub fn run(cfg: &Config, ctx: &mut Context) -> Result<()> {
    if cfg.decomposition.is_none()
        && cfg.power.is_none()
        && cfg.log.is_none()
        && cfg.decay.is_none()
        && cfg.chain.is_none()
    {
        return Err(ctx
            .source
            .error("experiment", "need at least one of decomposition, power, log, decay, chain"));
    }
    if let Some(c) = &cfg.decomposition {
        run_decomposition(c, ctx)?;
    }
    if let Some(c) = &cfg.power {
        run_power(c, ctx)?;
    }
    if let Some(c) = &cfg.log {
        run_log(c, ctx)?;
    }
    if let Some(c) = &cfg.decay {
        run_decay(c, ctx)?;
    }
    if let Some(c) = &cfg.chain {
        run_chain(c, ctx)?;
    }
    Ok(())
}

struct SampleRow {
    seminorm: f64,
    smooth_l2: f64,
    smooth_sup: f64,
    integrable_w12: f64,
    defect: f64,
}

fn run_decomposition(cfg: &Decomposition, ctx: &mut Context) -> Result<()> {
    let source = ctx.source;
    if cfg.samples == 0 || cfg.levels == 0 {
        return Err(source.error("samples", "samples and levels must be positive"));
    }
    positive(source, "kmax", cfg.kmax)?;
    let (seed, shift) = (ctx.seed, ctx.shift);
    let mut rows = Vec::new();
    let mut constants = Vec::new();
    let mut max_defect = 0.0f64;
    let mut bounds_hold = true;
    for level in 0..cfg.levels {
        let g = cfg.grid.with_n(cfg.grid.n << level).build(source, "grid", 1)?;
        if cfg.kmax >= g.max_wavenumber() {
            return Err(source.error("kmax", format!("band exceeds the grid's wavenumber {}", g.max_wavenumber())));
        }
        let eta = Mollifier::new(&g, cfg.mollifier_radius).map_err(|e| source.error("mollifier_radius", e))?;
        let samples: Vec<SampleRow> = (0..cfg.samples)
            .into_par_iter()
            .map(|s| -> beppo::Result<SampleRow> {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(s as u64));
                let u = testfields::band_limited(g, cfg.kmax, &mut rng)?;
                let class = builtins::class_input(&u, shift, 2.0)?;
                let dec = decompose(&class, &eta)?;
                let smooth_grad = grid::gradient(&dec.smooth_part)?;
                let j0 = &dec.integrable_part;
                let j0_l2 = grid::lp_norm(j0, 2.0)?;
                let j0_grad = grid::lp_norm(&grid::gradient(j0)?, 2.0)?;
                Ok(SampleRow {
                    seminorm: class.seminorm(),
                    smooth_l2: grid::lp_norm(&smooth_grad, 2.0)?,
                    smooth_sup: smooth_grad.magnitudes().into_iter().fold(0.0, f64::max),
                    integrable_w12: j0_l2.hypot(j0_grad),
                    defect: dec.reconstruction_defect(class.rep()),
                })
            })
            .collect::<beppo::Result<_>>()?;
        let mut constant = 0.0f64;
        for (s, r) in samples.iter().enumerate() {
            let ratio = r.integrable_w12 / r.seminorm;
            constant = constant.max(ratio);
            max_defect = max_defect.max(r.defect);
            bounds_hold &= r.smooth_l2 <= r.seminorm && r.smooth_sup <= r.seminorm;
            rows.push(vec![
                g.n().to_string(),
                s.to_string(),
                num(r.seminorm),
                num(r.smooth_l2),
                num(r.smooth_sup),
                num(r.integrable_w12),
                num(ratio),
                num(r.defect),
            ]);
        }
        constants.push(vec![g.n().to_string(), num(constant)]);
    }
    ctx.csv(
        "decomposition.csv",
        &[
            "n",
            "sample",
            "seminorm",
            "smooth_grad_l2",
            "smooth_grad_sup",
            "integrable_w12",
            "ratio",
            "defect",
        ],
        &rows,
    )?;
    let path = ctx.csv("decomposition_constants.csv", &["n", "constant"], &constants)?;
    ctx.plot(&path, PlotKind::Scaling)?;
    ctx.summarize("decomposition_max_defect", max_defect);
    ctx.summarize("decomposition_smooth_bounds_hold", bounds_hold);
    Ok(())
}

fn run_power(cfg: &Power, ctx: &mut Context) -> Result<()> {
    let source = ctx.source;
    let g = cfg.grid.build(source, "grid", 1)?;
    let field = builtins::class_field(source, "p", &format!("radial-power({})", cfg.p), g, ctx.seed)?;
    let class = builtins::class_input(&field, ctx.shift, cfg.p).map_err(|e| source.error("p", e))?;
    if class.p() <= g.d() as f64 {
        return Err(source.error("p", "power regime needs p > d"));
    }
    let eta = Mollifier::new(&g, 1.0)?;
    let radii = growth::default_radii(&g, cfg.radii);
    let report = growth::check_envelope(&class, &eta, &radii)?;
    let profile: Vec<(f64, f64)> = report.rows.iter().map(|r| (r.r, r.sup)).collect();
    let fitted = growth::fit_growth_exponent(&profile).map_err(|e| source.error("radii", e))?;
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| vec![num(r.r), num(r.sup), num(r.envelope), num(r.ratio)])
        .collect();
    let path = ctx.csv("power.csv", &["r", "sup", "envelope", "ratio"], &rows)?;
    ctx.plot(&path, PlotKind::Growth)?;
    ctx.summarize("power_exponent_fit", fitted);
    ctx.summarize("power_exponent_expected", report.exponent);
    ctx.summarize("power_constant", report.constant);
    Ok(())
}

fn run_log(cfg: &Log, ctx: &mut Context) -> Result<()> {
    let source = ctx.source;
    let mut rows = Vec::new();
    let mut constants = Vec::new();
    for gc in levels(&cfg.grid, &cfg.n_values) {
        let g = gc.build(source, "grid", 1)?;
        let p = g.d() as f64;
        let field = builtins::class_field(source, "log", "radial-log", g, ctx.seed)?;
        let class = builtins::class_input(&field, ctx.shift, p)?;
        let eta = Mollifier::new(&g, 1.0)?;
        let report = growth::check_envelope(&class, &eta, &growth::default_radii(&g, cfg.radii))?;
        for r in &report.rows {
            rows.push(vec![g.n().to_string(), num(r.r), num(r.sup), num(r.envelope), num(r.ratio)]);
        }
        constants.push(vec![g.n().to_string(), num(report.constant)]);
    }
    let path = ctx.csv("log.csv", &["n", "r", "sup", "envelope", "ratio"], &rows)?;
    ctx.plot(&path, PlotKind::Growth)?;
    ctx.csv("log_constants.csv", &["n", "constant"], &constants)?;
    Ok(())
}

fn run_decay(cfg: &Decay, ctx: &mut Context) -> Result<()> {
    let source = ctx.source;
    if cfg.radii < 2 {
        return Err(source.error("radii", "need at least two shells"));
    }
    let mut gns = Vec::new();
    let mut far = Vec::new();
    for gc in levels(&cfg.grid, &cfg.n_values) {
        let g = gc.build(source, "grid", 1)?;
        let field = builtins::class_field(source, "field", &cfg.field, g, ctx.seed)?;
        let class = builtins::class_input(&field, ctx.shift, cfg.p).map_err(|e| source.error("p", e))?;
        if class.p() >= g.d() as f64 {
            return Err(source.error("p", "decay regime needs p < d"));
        }
        let eta = Mollifier::new(&g, 1.0)?;
        let l = g.half_width();
        let radii: Vec<f64> = (0..cfg.radii)
            .map(|i| 0.25 * l + 0.25 * l * i as f64 / (cfg.radii - 1) as f64)
            .collect();
        let report = growth::check_envelope(&class, &eta, &radii)?;
        let ratio = report
            .gns_ratio
            .ok_or_else(|| RunError::from(beppo::Error::InvalidExponent(cfg.p)))?;
        gns.push(vec![g.n().to_string(), num(ratio)]);
        for (r, v) in growth::farfield_ratio(&class, &eta, &radii)? {
            far.push(vec![g.n().to_string(), num(r), num(v)]);
        }
    }
    ctx.csv("gns.csv", &["n", "gns_ratio"], &gns)?;
    let path = ctx.csv("farfield.csv", &["n", "r", "ratio"], &far)?;
    ctx.plot(&path, PlotKind::History)?;
    Ok(())
}

fn run_chain(cfg: &Chain, ctx: &mut Context) -> Result<()> {
    let source = ctx.source;
    non_empty(source, "targets", &cfg.targets)?;
    let g = cfg.grid.build(source, "grid", 1)?;
    let d = g.d();
    let field = builtins::class_field(source, "field", &cfg.field, g, ctx.seed)?;
    let class = builtins::class_input(&field, ctx.shift, cfg.p).map_err(|e| source.error("p", e))?;
    let seminorm = class.seminorm();
    let mut rows = Vec::new();
    let mut steps = Vec::new();
    let (mut c_step, mut c_total) = (0.0f64, 0.0f64);
    for &t in &cfg.targets {
        positive(source, "targets", t)?;
        let x = vec![t / (d as f64).sqrt(); d];
        let chain = build_cube_chain(&x).map_err(|e| source.error("targets", e))?;
        let osc = chain_oscillation(&class, &chain).map_err(|e| source.error("targets", e))?;
        let bound = 2.0 * t.log2() + 6.0;
        let max_step = osc.steps.iter().copied().fold(0.0, f64::max);
        let total_constant = if seminorm > 0.0 {
            osc.total / (seminorm * (2.0 + t).ln())
        } else {
            0.0
        };
        c_step = c_step.max(osc.step_constant);
        c_total = c_total.max(total_constant);
        rows.push(vec![
            num(t),
            chain.len().to_string(),
            num(bound),
            num(max_step),
            num(osc.total),
            num(osc.step_constant),
            num(total_constant),
        ]);
        for (j, s) in osc.steps.iter().enumerate() {
            steps.push(vec![num(t), j.to_string(), num(*s)]);
        }
    }
    let path = ctx.csv(
        "chain.csv",
        &["target", "length", "length_bound", "max_step", "total", "step_constant", "total_constant"],
        &rows,
    )?;
    ctx.plot(&path, PlotKind::Scaling)?;
    ctx.csv("chain_steps.csv", &["target", "step", "difference"], &steps)?;
    ctx.summarize("chain_seminorm", seminorm);
    ctx.summarize("chain_step_constant", c_step);
    ctx.summarize("chain_total_constant", c_total);
    Ok(())
}

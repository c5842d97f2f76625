//! Admissibility of right-hand side densities and their Riesz fluxes.
//!
//! Writes every report first, then fails with the inadmissible-rhs status if
//! any density has nonzero mean.

use beppo::functionals::{admissibility_report, apply, divergence, riesz_flux, FunctionalSpec};
use beppo::{testfields, Error};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::builtins;
use crate::config::{experiment_config, non_empty, positive, GridConfig};
use crate::error::{Result, RunError};
use crate::output::{num, Context};
use crate::plot::PlotKind;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dipole {
    #[serde(default = "one")]
    pub width: f64,
    pub separations: Vec<f64>,
}

fn one() -> f64 {
    1.0
}

fn eight() -> usize {
    8
}

experiment_config!(Config {
    grid: GridConfig,
    rhs: Vec<String>,
    #[serde(default)]
    dipole: Option<Dipole>,
    /// Random band-limited classes paired with each admissible rhs.
    #[serde(default = "eight")]
    classes: usize,
    #[serde(default = "one")]
    kmax: f64,
});

pub fn run(cfg: &Config, ctx: &mut Context) -> Result<()> {
    let source = ctx.source;
    non_empty(source, "rhs", &cfg.rhs)?;
    positive(source, "kmax", cfg.kmax)?;
    let grid = cfg.grid.build(source, "grid", 1)?;
    let mut rows = Vec::new();
    let mut pairing = Vec::new();
    let mut failure: Option<RunError> = None;
    let classes = (0..cfg.classes)
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed.wrapping_add(s as u64));
            let u = testfields::band_limited(grid, cfg.kmax, &mut rng)?;
            builtins::class_input(&u, ctx.shift, 2.0)
        })
        .collect::<beppo::Result<Vec<_>>>()
        .map_err(|e| source.error("kmax", e))?;
    for (case, spec) in cfg.rhs.iter().enumerate() {
        let f = builtins::rhs(source, "rhs", spec, grid)?;
        let report = admissibility_report(&f)?;
        let (mut riesz_norm, mut defect) = (String::new(), String::new());
        if report.admissible {
            let (flux, norm) = riesz_flux(&f)?;
            let back = divergence(&flux, grid.m())?;
            let scale = f.max_abs();
            let err = back.sub(&f)?.max_abs();
            riesz_norm = num(norm);
            defect = num(if scale > 0.0 { err / scale } else { err });
            let l = FunctionalSpec::density(f.clone())?;
            for (s, u) in classes.iter().enumerate() {
                let value = apply(&l, u)?;
                pairing.push(vec![
                    case.to_string(),
                    s.to_string(),
                    num(value),
                    num(norm * u.seminorm()),
                ]);
            }
        } else if failure.is_none() {
            failure = Some(Error::NonzeroMean {
                relative: report.zero_mean,
            }
            .into());
        }
        rows.push(vec![
            case.to_string(),
            spec.clone(),
            report.admissible.to_string(),
            num(report.zero_mean),
            num(report.moment),
            num(report.tail_fraction),
            num(report.fourier_slope),
            num(report.lipschitz_at_zero),
            num(report.flux_norm),
            riesz_norm,
            defect,
        ]);
    }
    let path = ctx.csv(
        "rhs.csv",
        &[
            "case",
            "rhs",
            "admissible",
            "zero_mean",
            "moment",
            "tail_fraction",
            "fourier_slope",
            "lipschitz_at_zero",
            "flux_norm",
            "riesz_norm",
            "divergence_defect",
        ],
        &rows,
    )?;
    ctx.plot(&path, PlotKind::History)?;
    ctx.csv("pairing.csv", &["case", "sample", "value", "bound"], &pairing)?;

    if let Some(dip) = &cfg.dipole {
        non_empty(source, "separations", &dip.separations)?;
        positive(source, "width", dip.width)?;
        let mut rows = Vec::new();
        let mut first = None;
        for &sep in &dip.separations {
            positive(source, "separations", sep)?;
            let f = testfields::gaussian_dipole(grid, sep, dip.width)?;
            let moment = admissibility_report(&f)?.moment;
            let base = *first.get_or_insert(moment);
            rows.push(vec![num(sep), num(moment), num(moment / base)]);
        }
        let path = ctx.csv("dipole.csv", &["separation", "moment", "ratio_to_first"], &rows)?;
        ctx.plot(&path, PlotKind::Scaling)?;
    }
    match failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

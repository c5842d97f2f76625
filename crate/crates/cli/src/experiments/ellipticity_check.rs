//! Legendre–Hadamard constants and coercivity certificates of tensors.

use beppo::ellipticity::{lh_constant, DEFAULT_SPHERE_SAMPLES};
use beppo::solver::certify;
use beppo::{Error, Grid};

use crate::builtins;
use crate::config::{experiment_config, non_empty, positive, GridConfig};
use crate::error::{Result, RunError};
use crate::output::{num, Context};
use crate::plot::PlotKind;

fn three() -> f64 {
    3.0
}

fn samples() -> usize {
    DEFAULT_SPHERE_SAMPLES
}

experiment_config!(Config {
    d: usize,
    tensors: Vec<String>,
    /// Grid for coefficient fields; constant tensors do not need one.
    #[serde(default)]
    grid: Option<GridConfig>,
    /// Factor of the homogeneity check `c0(sC) = s·c0(C)`.
    #[serde(default = "three")]
    scale: f64,
    #[serde(default = "samples")]
    refinement: usize,
});

/// Rounded for display; the CSV keeps every digit.
fn display(c0: f64) -> String {
    format!("{:?}", (c0 * 1e9).round() / 1e9)
}

pub fn run(cfg: &Config, ctx: &mut Context) -> Result<()> {
    let source = ctx.source;
    non_empty(source, "tensors", &cfg.tensors)?;
    positive(source, "scale", cfg.scale)?;
    if cfg.d == 0 || cfg.d > beppo::grid::MAX_DIM {
        return Err(source.error("d", format!("need 1 ≤ d ≤ {}", beppo::grid::MAX_DIM)));
    }
    let grid = match &cfg.grid {
        Some(g) => {
            if g.d != cfg.d {
                return Err(source.error("grid", "grid dimension differs from `d`"));
            }
            Some(g.build(source, "grid", 1)?)
        }
        None => None,
    };
    let mut rows = Vec::new();
    let mut failure: Option<RunError> = None;
    for (case, spec) in cfg.tensors.iter().enumerate() {
        let on = match grid {
            Some(g) => g,
            None => Grid::new(cfg.d, 1, std::f64::consts::PI, 16)?,
        };
        let tensor = builtins::tensor(source, "tensors", spec, on)?;
        if !tensor.is_constant() && grid.is_none() {
            return Err(source.error("grid", format!("`{spec}` varies in space and needs a grid")));
        }
        let scaled = tensor.scaled(cfg.scale);
        let (provenance, c0, c0_scaled) = if tensor.is_constant() {
            (
                "legendre-hadamard".to_string(),
                lh_constant(&tensor, cfg.refinement)?,
                lh_constant(&scaled, cfg.refinement)?,
            )
        } else {
            match (certify(&tensor), certify(&scaled)) {
                (Ok(a), Ok(b)) => {
                    let name = serde_json::to_value(a.provenance)?;
                    (name.as_str().unwrap_or_default().to_string(), a.c0, b.c0)
                }
                (Err(e), _) | (_, Err(e)) => {
                    let c0 = match e {
                        Error::LegendreHadamard { c0 } | Error::NotCertified { c0 } => c0,
                        other => return Err(other.into()),
                    };
                    ("none".to_string(), c0, f64::NAN)
                }
            }
        };
        if !(c0 > 0.0) && failure.is_none() {
            failure = Some(Error::LegendreHadamard { c0 }.into());
        }
        println!("{spec}: c0 = {}", display(c0));
        rows.push(vec![
            case.to_string(),
            spec.clone(),
            provenance,
            num(c0),
            num(c0_scaled),
            num((c0_scaled - cfg.scale * c0).abs()),
            tensor.is_major_symmetric(1e-12).to_string(),
        ]);
    }
    let path = ctx.csv(
        "ellipticity.csv",
        &[
            "case",
            "tensor",
            "provenance",
            "c0",
            "scaled_c0",
            "homogeneity_defect",
            "major_symmetric",
        ],
        &rows,
    )?;
    ctx.plot(&path, PlotKind::History)?;
    match failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

//! Second- and third-order derivative bounds for a computed solution,
//! checked direction by direction as in the difference-quotient argument.
//!
//! `c₂` in the third-order bound is taken to be `‖∂u‖_{L²}`.

use serde::Serialize;

use super::certify;
use crate::ellipticity::{operator_norm, Tensor4};
use crate::error::{Error, Result};
use crate::grid::{self, Field, Grid};
use crate::quotient::HomogeneousClass;

/// Fraction of spectral energy of `C` allowed in modes with `|q| > N/4`.
pub const RESOLUTION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirectionCheck {
    /// Differentiation directions (0-based), one for second order, two for
    /// third order.
    pub directions: Vec<usize>,
    /// `c₀‖∂(∂_γ u)‖` or `c₀‖∂(∂_γ∂_δ u)‖`.
    pub measured: f64,
    pub bound: f64,
    pub margin: f64,
}

impl DirectionCheck {
    fn new(directions: Vec<usize>, measured: f64, bound: f64) -> Self {
        Self {
            directions,
            measured,
            bound,
            margin: bound - measured,
        }
    }

    pub fn ok(&self) -> bool {
        self.margin >= 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasuredNorms {
    pub c0: f64,
    /// `‖∂u‖_{L²}`, also used as `c₂`.
    pub grad_u: f64,
    pub hess_u: f64,
    pub third_u: f64,
    pub f: f64,
    pub grad_f: f64,
    /// `max_γ ‖∂_γ C‖_{L^∞}`.
    pub dc_sup: f64,
    /// `max_γ ‖∂_γ C‖_{L²}`.
    pub dc_l2: f64,
    /// `max_{γ,δ} ‖∂_γ∂_δ C‖_{L^∞}`.
    pub d2c_sup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityReport {
    /// Every second-order direction check and the summed check
    /// `c₀‖∂²u‖ ≤ ‖f‖ + √d ‖∂C‖_{L^∞}‖∂u‖` hold.
    pub h2_bound_ok: bool,
    /// Every third-order direction check in the stated form holds:
    /// `c₀‖∂∂_γ∂_δ u‖ ≤ ‖∂f‖ + ‖∂C‖_{L²}‖∂²u‖ + c₂‖∂²C‖_{L^∞}`.
    pub h3_bound_ok: bool,
    /// Third-order checks re-derived from the tested identity:
    /// `c₀‖∂∂_γ∂_δ u‖ ≤ ‖∂_δ f‖ + ‖∂_γC‖_∞‖∂∂_δu‖ + ‖∂_δC‖_∞‖∂∂_γu‖ + ‖∂_γ∂_δC‖_∞‖∂u‖`.
    pub h3_derived_ok: bool,
    pub measured_norms: MeasuredNorms,
    pub second: Vec<DirectionCheck>,
    pub second_total: DirectionCheck,
    pub third: Vec<DirectionCheck>,
    pub third_derived: Vec<DirectionCheck>,
}

/// Fraction of spectral energy with some `|q_axis| > N/4`.
fn spectral_tail(field: &Field) -> f64 {
    let grid = *field.grid();
    let spec = grid::forward_unchecked(field);
    let (n, d) = (grid.n() as i64, grid.d());
    let len = grid.points();
    let (mut tail, mut total) = (0.0, 0.0);
    for (i, z) in spec.coeffs().iter().enumerate() {
        let idx = grid.multi_index(i % len);
        let e = z.norm_sqr();
        total += e;
        if idx[..d].iter().any(|&q| grid.signed_frequency(q).abs() > n / 4) {
            tail += e;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        tail / total
    }
}

/// Per-point operator norms of a tensor-valued field.
fn pointwise_norms(field: &Field, md: usize) -> Vec<f64> {
    let len = field.grid().points();
    let mut rec = vec![0.0; md * md];
    (0..len)
        .map(|flat| {
            for (c, r) in rec.iter_mut().enumerate() {
                *r = field.values()[c * len + flat];
            }
            operator_norm(&rec, md)
        })
        .collect()
}

struct CoefficientDerivatives {
    /// `‖∂_γ C‖_{L^∞}` per direction.
    first_sup: Vec<f64>,
    first_l2: Vec<f64>,
    /// `‖∂_γ∂_δ C‖_{L^∞}`, row-major `d×d`.
    second_sup: Vec<f64>,
}

fn coefficient_derivatives(c: &Tensor4, d: usize) -> Result<CoefficientDerivatives> {
    let Some(field) = c.field() else {
        return Ok(CoefficientDerivatives {
            first_sup: vec![0.0; d],
            first_l2: vec![0.0; d],
            second_sup: vec![0.0; d * d],
        });
    };
    let tail = spectral_tail(field);
    if tail > RESOLUTION_TOL {
        return Err(Error::Unresolved { tail });
    }
    let md = c.m() * c.d();
    let volume = field.grid().cell_volume();
    let mut first_sup = Vec::with_capacity(d);
    let mut first_l2 = Vec::with_capacity(d);
    let mut firsts = Vec::with_capacity(d);
    for g in 0..d {
        let dc = grid::spectral_derivative(field, g)?;
        let norms = pointwise_norms(&dc, md);
        first_sup.push(norms.iter().copied().fold(0.0, f64::max));
        first_l2.push((norms.iter().map(|v| v * v).sum::<f64>() * volume).sqrt());
        firsts.push(dc);
    }
    let mut second_sup = vec![0.0; d * d];
    for g in 0..d {
        for e in g..d {
            let ddc = grid::spectral_derivative(&firsts[g], e)?;
            let sup = pointwise_norms(&ddc, md).into_iter().fold(0.0, f64::max);
            second_sup[g * d + e] = sup;
            second_sup[e * d + g] = sup;
        }
    }
    Ok(CoefficientDerivatives {
        first_sup,
        first_l2,
        second_sup,
    })
}

/// Spectral `L²` norms `sqrt(h^d Σ w(k) |û(k)|²)`.
fn weighted_norm(spec: &grid::SpectralField, grid: &Grid, weight: impl Fn(&[f64]) -> f64) -> f64 {
    let len = grid.points();
    let d = grid.d();
    let sum: f64 = spec
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, z)| {
            let k = grid.derivative_symbol(i % len);
            weight(&k[..d]) * z.norm_sqr()
        })
        .sum();
    (sum * grid.cell_volume()).sqrt()
}

/// Checks the regularity estimates for a solution `u` of `−div C:∂u = f`.
pub fn regularity_check(c: &Tensor4, f: &Field, u: &HomogeneousClass) -> Result<RegularityReport> {
    let grid = *u.grid();
    f.grid().check_domain(&grid)?;
    if f.grid().m() != grid.m() || c.m() != grid.m() || c.d() != grid.d() {
        return Err(Error::WrongComponents {
            expected: grid.m(),
            got: f.grid().m(),
        });
    }
    if let Some(g) = c.grid() {
        g.check_domain(&grid)?;
    }
    let d = grid.d();
    let c0 = certify(c)?.c0;
    let coef = coefficient_derivatives(c, d)?;
    let dc_sup = coef.first_sup.iter().copied().fold(0.0, f64::max);
    let dc_l2 = coef.first_l2.iter().copied().fold(0.0, f64::max);
    let d2c_sup = coef.second_sup.iter().copied().fold(0.0, f64::max);

    let spec = grid::forward_transform(u.rep())?;
    let fspec = grid::forward_transform(f)?;
    let k2 = |k: &[f64]| k.iter().map(|v| v * v).sum::<f64>();
    let grad_u = weighted_norm(&spec, &grid, k2);
    let hess_u = weighted_norm(&spec, &grid, |k| k2(k).powi(2));
    let third_u = weighted_norm(&spec, &grid, |k| k2(k).powi(3));
    let f_norm = weighted_norm(&fspec, &grid, |_| 1.0);
    let grad_f = weighted_norm(&fspec, &grid, k2);
    // ‖∂(∂_γ u)‖ and ‖∂_δ f‖ per direction.
    let hess_dir: Vec<f64> = (0..d)
        .map(|g| weighted_norm(&spec, &grid, |k| k[g] * k[g] * k2(k)))
        .collect();
    let grad_f_dir: Vec<f64> = (0..d)
        .map(|g| weighted_norm(&fspec, &grid, |k| k[g] * k[g]))
        .collect();

    let second: Vec<DirectionCheck> = (0..d)
        .map(|g| DirectionCheck::new(vec![g], c0 * hess_dir[g], f_norm + coef.first_sup[g] * grad_u))
        .collect();
    let second_total = DirectionCheck::new(
        (0..d).collect(),
        c0 * hess_u,
        f_norm + (d as f64).sqrt() * dc_sup * grad_u,
    );
    let mut third = Vec::new();
    let mut third_derived = Vec::new();
    for g in 0..d {
        for e in g..d {
            let measured =
                c0 * weighted_norm(&spec, &grid, |k| k[g] * k[g] * k[e] * k[e] * k2(k));
            third.push(DirectionCheck::new(
                vec![g, e],
                measured,
                grad_f + dc_l2 * hess_u + grad_u * d2c_sup,
            ));
            let derived = grad_f_dir[e]
                + coef.first_sup[g] * hess_dir[e]
                + coef.first_sup[e] * hess_dir[g]
                + coef.second_sup[g * d + e] * grad_u;
            third_derived.push(DirectionCheck::new(vec![g, e], measured, derived));
        }
    }
    Ok(RegularityReport {
        h2_bound_ok: second.iter().all(DirectionCheck::ok) && second_total.ok(),
        h3_bound_ok: third.iter().all(DirectionCheck::ok),
        h3_derived_ok: third_derived.iter().all(DirectionCheck::ok),
        measured_norms: MeasuredNorms {
            c0,
            grad_u,
            hess_u,
            third_u,
            f: f_norm,
            grad_f,
            dc_sup,
            dc_l2,
            d2c_sup,
        },
        second,
        second_total,
        third,
        third_derived,
    })
}

//! Smooth fields used by the experiments and tests: Gaussians, radial
//! growth profiles and random band-limited data.

use std::f64::consts::PI;

use rand::Rng;

use crate::error::{Error, Result};
use crate::grid::{self, Field, Grid};
use crate::quotient::{self, Mollifier};

/// `amplitude · exp(−|x − center|² / width²)` in every component.
pub fn gaussian(grid: Grid, center: &[f64], width: f64, amplitude: f64) -> Result<Field> {
    Field::from_components(grid, |_, x| {
        let r2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
        amplitude * (-r2 / (width * width)).exp()
    })
}

/// Two unit Gaussians at `±separation/2` along the first axis with opposite
/// signs: a zero-mean right-hand side.
pub fn gaussian_dipole(grid: Grid, separation: f64, width: f64) -> Result<Field> {
    let d = grid.d();
    let mut plus = vec![0.0; d];
    let mut minus = vec![0.0; d];
    plus[0] = 0.5 * separation;
    minus[0] = -0.5 * separation;
    gaussian(grid, &plus, width, 1.0)?.sub(&gaussian(grid, &minus, width, 1.0)?)
}

/// `∂_axis exp(−|x|²/width²)`.
pub fn gaussian_gradient(grid: Grid, axis: usize, width: f64) -> Result<Field> {
    if axis >= grid.d() {
        return Err(Error::AxisOutOfRange { axis, d: grid.d() });
    }
    Field::from_components(grid, |_, x| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        -2.0 * x[axis] / (width * width) * (-r2 / (width * width)).exp()
    })
}

/// Random field whose Fourier modes are supported in `|k| ≤ kmax`, with
/// independent uniform coefficients on the band and conjugate symmetry.
///
/// Modes are drawn in a fixed order of integer wavevectors, so one seed gives
/// the same function on every grid of the same box that resolves the band.
pub fn band_limited<R: Rng>(grid: Grid, kmax: f64, rng: &mut R) -> Result<Field> {
    let d = grid.d();
    let len = grid.points();
    let scale = PI / grid.half_width();
    let qmax = ((kmax / scale).floor() as i64).min(grid.n() as i64 / 2 - 1).max(0);
    let side = (2 * qmax + 1) as usize;
    let mut modes: Vec<[f64; grid::MAX_DIM]> = Vec::new();
    for i in 0..side.pow(d as u32) {
        let mut k = [0.0; grid::MAX_DIM];
        let mut rest = i;
        for a in (0..d).rev() {
            k[a] = ((rest % side) as i64 - qmax) as f64 * scale;
            rest /= side;
        }
        let n2: f64 = k[..d].iter().map(|v| v * v).sum();
        if n2 > 0.0 && n2.sqrt() <= kmax && is_half_space(&k[..d]) {
            modes.push(k);
        }
    }
    let mut values = vec![0.0; grid.m() * len];
    for c in 0..grid.m() {
        let coeffs: Vec<(f64, f64)> = modes
            .iter()
            .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        for flat in 0..len {
            let x = grid.point(flat);
            values[c * len + flat] = modes
                .iter()
                .zip(&coeffs)
                .map(|(k, (a, b))| {
                    let phase: f64 = k[..d].iter().zip(&x[..d]).map(|(k, x)| k * x).sum();
                    a * phase.cos() + b * phase.sin()
                })
                .sum();
        }
    }
    Field::new(grid, values)
}

/// Picks one of `k`, `−k`.
fn is_half_space(k: &[f64]) -> bool {
    for v in k {
        if *v > 0.0 {
            return true;
        }
        if *v < 0.0 {
            return false;
        }
    }
    false
}

/// Inner smoothing `ρ(r)`: `r` for `r ≥ 1`, an even quartic below, matching
/// value, slope and curvature at `r = 1`.
fn inner(r: f64) -> (f64, f64) {
    if r >= 1.0 {
        (r, 1.0)
    } else {
        let r2 = r * r;
        (0.375 + 0.75 * r2 - 0.125 * r2 * r2, 1.5 * r - 0.5 * r2 * r)
    }
}

/// Smooth step from 1 (below `a`) to 0 (above `b`).
fn flatten(r: f64, a: f64, b: f64) -> f64 {
    if r <= a {
        1.0
    } else if r >= b {
        0.0
    } else {
        let t = (r - a) / (b - a);
        1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
    }
}

/// Growth profile of a radial test field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadialGrowth {
    /// `|∂u| = r^{−1/p}` outside the unit ball (`p > d` growth).
    Power { p: f64 },
    /// `|∂u| = 1/r` outside the unit ball (critical growth).
    Log,
}

/// Radial field equal to `p′ r^{1/p′}` (power) or `log r` (log) on
/// `1 ≤ r ≤ 0.6L`, smoothed inside the unit ball and made constant beyond
/// `0.85L` so that it is smooth and periodic on the box.
pub fn radial_growth(grid: Grid, growth: RadialGrowth) -> Result<Field> {
    let l = grid.half_width();
    let (a, b) = (0.6 * l, 0.85 * l);
    let slope = |r: f64| {
        let (rho, drho) = inner(r);
        let g = match growth {
            RadialGrowth::Power { p } => drho * rho.powf(-1.0 / p),
            RadialGrowth::Log => drho / rho,
        };
        g * flatten(r, a, b)
    };
    if let RadialGrowth::Power { p } = growth {
        if !(p > 1.0) {
            return Err(Error::InvalidExponent(p));
        }
    }
    // Tabulate u(r) = ∫₀^r slope with 3-point Gauss per cell, then
    // interpolate with cubic Hermite pieces using the exact slope.
    let step = (grid.spacing() / 8.0).min(0.01);
    let cells = (b / step).ceil() as usize + 1;
    let (nodes, weights) = ([-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4], [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0]);
    let (rho0, _) = inner(0.0);
    let mut table = vec![0.0; cells + 1];
    table[0] = match growth {
        RadialGrowth::Power { p } => {
            let q = 1.0 - 1.0 / p;
            rho0.powf(q) / q
        }
        RadialGrowth::Log => rho0.ln(),
    };
    for i in 0..cells {
        let mid = (i as f64 + 0.5) * step;
        let inc: f64 = nodes
            .iter()
            .zip(weights)
            .map(|(t, w)| w * slope(mid + 0.5 * step * t))
            .sum();
        table[i + 1] = table[i] + 0.5 * step * inc;
    }
    let value = |r: f64| {
        if r >= b {
            return table[((b / step).floor() as usize + 1).min(cells)];
        }
        let i = (r / step).floor() as usize;
        let t = r / step - i as f64;
        let (r0, r1) = (i as f64 * step, (i + 1) as f64 * step);
        let (y0, y1) = (table[i], table[i + 1]);
        let (m0, m1) = (slope(r0) * step, slope(r1) * step);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * m1
    };
    Field::from_components(grid, |_, x| value(x.iter().map(|v| v * v).sum::<f64>().sqrt()))
}

/// Smooth bump `exp(−1/(1 − |x|²))` supported in the unit ball.
pub fn unit_bump(grid: Grid) -> Result<Field> {
    Field::from_components(grid, |_, x| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        if r2 < 1.0 {
            (-1.0 / (1.0 - r2)).exp()
        } else {
            0.0
        }
    })
}

/// Adds a multiple of [`unit_bump`] so that `(η ∗ u)(0) = 0`.
///
/// Outside the unit ball the field is unchanged. For the profiles of
/// [`radial_growth`] the smooth part `J∞u = η ∗ u − (η ∗ u)(0)` then follows
/// the pure power or logarithm without an additive offset.
pub fn balance_origin(field: &Field, eta: &Mollifier) -> Result<Field> {
    let grid = *field.grid();
    let o = quotient::origin_index(&grid);
    let bump = unit_bump(grid)?;
    let vb = eta.apply(&bump)?;
    let vu = eta.apply(field)?;
    let shift: Vec<f64> = (0..grid.m())
        .map(|c| vu.component(c)[o] / vb.component(c)[o])
        .collect();
    let len = grid.points();
    let values = field
        .values()
        .iter()
        .zip(bump.values())
        .enumerate()
        .map(|(i, (u, b))| u - shift[i / len] * b)
        .collect();
    Field::new(grid, values)
}

/// `f = −Σ C_{iαjβ} ∂_α∂_β u_j` for `u_j = a_j exp(−|x − c_j|²)`, evaluated
/// analytically. `tensor` is one constant record.
pub fn manufactured_rhs(
    grid: Grid,
    tensor: &[f64],
    amplitudes: &[f64],
    centers: &[Vec<f64>],
) -> Result<(Field, Field)> {
    let d = grid.d();
    let m = amplitudes.len();
    let u = Field::from_components(grid.with_components(m), |j, x| {
        let r2: f64 = x.iter().zip(&centers[j]).map(|(a, b)| (a - b) * (a - b)).sum();
        amplitudes[j] * (-r2).exp()
    })?;
    let f = Field::from_components(grid.with_components(m), |i, x| {
        let mut s = 0.0;
        for j in 0..m {
            let y: Vec<f64> = x.iter().zip(&centers[j]).map(|(a, b)| a - b).collect();
            let r2: f64 = y.iter().map(|v| v * v).sum();
            let uj = amplitudes[j] * (-r2).exp();
            for a in 0..d {
                for b in 0..d {
                    let delta = if a == b { 2.0 } else { 0.0 };
                    let hess = (4.0 * y[a] * y[b] - delta) * uj;
                    s += tensor[((i * d + a) * m + j) * d + b] * hess;
                }
            }
        }
        -s
    })?;
    Ok((u, f))
}

/// `sin(π x₁ / L)` in every component.
pub fn sine_mode(grid: Grid) -> Result<Field> {
    let l = grid.half_width();
    Field::from_components(grid, |_, x| (PI * x[0] / l).sin())
}

//! Homogeneous Sobolev classes `[u] = {u + c}`: canonical representatives,
//! the seminorm `‖∂u‖_{L^p}`, the mollifier splitting `[u] = [J∞u + J0u]`
//! and the cut-off density sequence.

mod line;

pub use line::{d1_counterexample, deny_lions_example, DenyLions, PiecewiseLinear};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{self, ExactSum};
use crate::grid::{self, Field, Grid};

/// An equivalence class modulo per-component constants, stored through its
/// zero-box-mean representative.
#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneousClass {
    rep: Field,
    p: f64,
}

impl HomogeneousClass {
    /// Subtracts the box mean of every component.
    ///
    /// The mean is formed with exact summation and each sample is rounded
    /// once, so inputs that differ by an exactly representable constant shift
    /// produce bit-identical representatives.
    pub fn canonicalize(field: &Field, p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidExponent(p));
        }
        field.check_finite()?;
        let grid = *field.grid();
        let inv = 1.0 / grid.points() as f64;
        let mut values = Vec::with_capacity(field.values().len());
        for c in 0..grid.m() {
            let comp = field.component(c);
            let mut sum = ExactSum::new();
            comp.iter().for_each(|&v| sum.add(v));
            // N^d is a power of two, so scaling the partials is exact.
            let mean: Vec<f64> = sum.partials().iter().map(|s| s * inv).collect();
            values.extend(comp.iter().map(|&v| exact::difference(v, &mean)));
        }
        Ok(Self {
            rep: Field::new(grid, values)?,
            p,
        })
    }

    pub fn zero(grid: Grid, p: f64) -> Result<Self> {
        Self::canonicalize(&Field::zeros(grid), p)
    }

    pub fn rep(&self) -> &Field {
        &self.rep
    }

    pub fn into_rep(self) -> Field {
        self.rep
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn grid(&self) -> &Grid {
        self.rep.grid()
    }

    /// `∂u` with `m·d` components.
    pub fn gradient(&self) -> Field {
        grid::gradient(&self.rep).expect("representative is finite")
    }

    /// `‖∂u‖_{L^p}`.
    pub fn seminorm(&self) -> f64 {
        grid::lp_norm(&self.gradient(), self.p).expect("p validated on construction")
    }

    /// The same class measured with a different exponent.
    pub fn with_exponent(&self, p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidExponent(p));
        }
        Ok(Self {
            rep: self.rep.clone(),
            p,
        })
    }

    /// Class of `s·u`.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            rep: self.rep.scale(s),
            p: self.p,
        }
    }
}

pub fn canonicalize(field: &Field, p: f64) -> Result<HomogeneousClass> {
    HomogeneousClass::canonicalize(field, p)
}

pub fn seminorm(class: &HomogeneousClass) -> f64 {
    class.seminorm()
}

fn bump(s2: f64) -> f64 {
    if s2 < 1.0 {
        (-1.0 / (1.0 - s2)).exp()
    } else {
        0.0
    }
}

/// A radial bump `η ≥ 0` of unit discrete mass with `η ≤ 1`, sampled with its
/// center at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct Mollifier {
    radius: f64,
    kernel: Field,
}

impl Mollifier {
    /// Builds the bump of the requested radius, doubling it until the
    /// normalized peak is at most 1.
    pub fn new(grid: &Grid, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Mollifier(format!("radius {radius} must be positive")));
        }
        let grid = grid.with_components(1);
        let mut r = radius;
        loop {
            if r >= grid.half_width() {
                return Err(Error::Mollifier(format!(
                    "support radius {r} does not fit inside the box of half-width {}",
                    grid.half_width()
                )));
            }
            let raw = grid.sample(|x| bump(x.iter().map(|v| v * v).sum::<f64>() / (r * r)));
            let mass: f64 = raw.iter().sum::<f64>() * grid.cell_volume();
            if mass > 0.0 {
                let values: Vec<f64> = raw.iter().map(|v| v / mass).collect();
                if values.iter().all(|&v| v <= 1.0) {
                    return Ok(Self {
                        radius: r,
                        kernel: Field::new(grid, values)?,
                    });
                }
            }
            r *= 2.0;
        }
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn kernel(&self) -> &Field {
        &self.kernel
    }

    pub fn peak(&self) -> f64 {
        self.kernel.max_abs()
    }

    /// `Σ η h^d`.
    pub fn mass(&self) -> f64 {
        self.kernel.integrals()[0]
    }

    pub fn apply(&self, field: &Field) -> Result<Field> {
        grid::convolve(field, &self.kernel)
    }
}

/// `[u] = [J∞u + J0u]` with `J∞u` smooth and `J0u ∈ W^{1,p}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub smooth_part: Field,
    pub integrable_part: Field,
    /// Constant removed from `η ∗ u` per component.
    pub anchor: Vec<f64>,
}

impl Decomposition {
    /// Largest deviation of `J∞u + J0u + anchor` from `rep`.
    pub fn reconstruction_defect(&self, rep: &Field) -> f64 {
        let len = rep.grid().points();
        rep.values()
            .iter()
            .zip(self.smooth_part.values())
            .zip(self.integrable_part.values())
            .enumerate()
            .map(|(i, ((u, s), w))| (s + w + self.anchor[i / len] - u).abs())
            .fold(0.0, f64::max)
    }
}

/// Flat index of the sample at the origin.
pub(crate) fn origin_index(grid: &Grid) -> usize {
    grid.flat_index(&[grid.n() / 2; grid::MAX_DIM])
}

/// Whether sample `flat` lies in the far-field frame `‖x‖_∞ ≥ 3L/4`.
pub(crate) fn in_far_frame(grid: &Grid, flat: usize) -> bool {
    let x = grid.point(flat);
    x[..grid.d()]
        .iter()
        .any(|v| v.abs() >= 0.75 * grid.half_width())
}

/// `J∞u = η ∗ u − anchor`, `J0u = u − η ∗ u`.
///
/// For `p ≥ d` the anchor is `(η ∗ u)(0)`. For `p < d` the smooth part
/// should vanish at infinity, so the anchor is the mean of `η ∗ u` over the
/// far-field frame of the box.
pub fn decompose(class: &HomogeneousClass, eta: &Mollifier) -> Result<Decomposition> {
    let grid = *class.grid();
    let mollified = eta.apply(class.rep())?;
    let d = grid.d() as f64;
    let anchor: Vec<f64> = if class.p() >= d {
        let o = origin_index(&grid);
        (0..grid.m()).map(|c| mollified.component(c)[o]).collect()
    } else {
        (0..grid.m())
            .map(|c| {
                let (s, n) = mollified
                    .component(c)
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| in_far_frame(&grid, *i))
                    .fold((0.0, 0usize), |(s, n), (_, v)| (s + v, n + 1));
                s / n as f64
            })
            .collect()
    };
    let smooth_part = mollified.shifted(&anchor.iter().map(|a| -a).collect::<Vec<_>>());
    let integrable_part = class.rep().sub(&mollified)?;
    Ok(Decomposition {
        smooth_part,
        integrable_part,
        anchor,
    })
}

/// Smooth radial cut-off: 1 on `s ≤ 1`, 0 on `s ≥ 2`, and its derivative.
fn cutoff(s: f64) -> (f64, f64) {
    if s <= 1.0 {
        (1.0, 0.0)
    } else if s >= 2.0 {
        (0.0, 0.0)
    } else {
        let t = s - 1.0;
        let step = t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
        let dstep = 30.0 * t * t * (1.0 - t) * (1.0 - t);
        (1.0 - step, -dstep)
    }
}

/// One member `u_n = η(|x|/n)(u − (u)_{A_n})` of the density sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityStep {
    pub n: f64,
    pub field: Field,
    /// `‖∂u − ∂u_n‖_{L^p}`.
    pub gradient_error: f64,
    /// `‖∂u‖_{L^p(|x| > n)}`.
    pub tail_norm: f64,
    /// Annulus averages `(u)_{A_n}` per component.
    pub annulus_mean: Vec<f64>,
}

impl DensityStep {
    /// `gradient_error / tail_norm` (0 when both vanish).
    pub fn ratio(&self) -> f64 {
        if self.tail_norm == 0.0 {
            if self.gradient_error == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            self.gradient_error / self.tail_norm
        }
    }
}

/// Cut-off approximation on the annulus `A_n = {n ≤ |x| < 2n}`.
///
/// The gradient of `u_n` is assembled as `η ∂u + (u − (u)_{A_n}) ∂η` with the
/// cut-off differentiated analytically.
pub fn density_sequence(class: &HomogeneousClass, n: f64) -> Result<DensityStep> {
    let grid = *class.grid();
    let (m, d) = (grid.m(), grid.d());
    let p = class.p();
    if d == 1 && p <= 1.0 {
        return Err(Error::InvalidExponent(p));
    }
    if !(n > 0.0) || 2.0 * n >= grid.half_width() {
        return Err(Error::AnnulusOutsideBox {
            inner: n,
            outer: 2.0 * n,
            half_width: grid.half_width(),
        });
    }
    let len = grid.points();
    let radius: Vec<f64> = (0..len).map(|i| grid.radius(i)).collect();
    let in_annulus: Vec<bool> = radius.iter().map(|&r| r >= n && r < 2.0 * n).collect();
    let count = in_annulus.iter().filter(|&&b| b).count();
    if count == 0 {
        return Err(Error::EmptyShell { radius: n });
    }
    let rep = class.rep();
    let annulus_mean: Vec<f64> = (0..m)
        .map(|c| {
            rep.component(c)
                .iter()
                .zip(&in_annulus)
                .filter(|(_, &b)| b)
                .map(|(v, _)| v)
                .sum::<f64>()
                / count as f64
        })
        .collect();

    let grad = class.gradient();
    let mut values = vec![0.0; m * len];
    let mut error = vec![0.0; m * d * len];
    for flat in 0..len {
        let r = radius[flat];
        let (eta, deta) = cutoff(r / n);
        let x = grid.point(flat);
        for c in 0..m {
            let shifted = rep.component(c)[flat] - annulus_mean[c];
            values[c * len + flat] = eta * shifted;
            for a in 0..d {
                let g = grad.component(c * d + a)[flat];
                let dcut = if r > 0.0 { deta / n * x[a] / r } else { 0.0 };
                error[(c * d + a) * len + flat] = (1.0 - eta) * g - shifted * dcut;
            }
        }
    }
    let error = Field::new(grid.with_components(m * d), error)?;
    let gradient_error = grid::lp_norm(&error, p)?;
    let tail_norm = grid::lp_norm_masked(&grad, p, |i| radius[i] > n)?;
    Ok(DensityStep {
        n,
        field: Field::new(grid, values)?,
        gradient_error,
        tail_norm,
        annulus_mean,
    })
}

/// Which quadrature [`w11_mean_invariant`] uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Window {
    /// The samples are one period: `∫ u′` uses the spectral derivative.
    Periodic,
    /// The samples cover an open interval without wrap: `∫ u′` telescopes to
    /// `u(last) − u(first)`.
    Open,
}

/// `∫ u′ dx` over a 1-d window.
pub fn w11_mean_invariant(field: &Field, window: Window) -> Result<f64> {
    let grid = field.grid();
    if grid.d() != 1 {
        return Err(Error::WrongDimension {
            expected: 1,
            got: grid.d(),
        });
    }
    if grid.m() != 1 {
        return Err(Error::WrongComponents {
            expected: 1,
            got: grid.m(),
        });
    }
    field.check_finite()?;
    Ok(match window {
        Window::Periodic => {
            let du = grid::spectral_derivative(field, 0)?;
            du.values().iter().sum::<f64>() * grid.spacing()
        }
        Window::Open => {
            let v = field.values();
            v[v.len() - 1] - v[0]
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid2(l: f64, n: usize) -> Grid {
        Grid::new(2, 1, l, n).unwrap()
    }

    #[test]
    fn canonicalize_examples() {
        let g = grid2(3.0, 16);
        let c = HomogeneousClass::canonicalize(&Field::from_fn(g, |_| 4.25).unwrap(), 2.0).unwrap();
        assert!(c.rep().values().iter().all(|v| *v == 0.0));

        let u = Field::from_fn(g, |x| (x[0] * x[1]).sin() + 0.3 * x[0])
            .unwrap()
            .quantized(2f64.powi(-40));
        let a = HomogeneousClass::canonicalize(&u, 2.0).unwrap();
        let b = HomogeneousClass::canonicalize(&u.shifted(&[17.0]), 2.0).unwrap();
        assert_eq!(a.rep(), b.rep());

        let s = Field::from_fn(g, |x| (PI * x[0] / 3.0).sin()).unwrap();
        let cs = HomogeneousClass::canonicalize(&s, 2.0).unwrap();
        for (x, y) in cs.rep().values().iter().zip(s.values()) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn canonical_mean_vanishes() {
        let g = Grid::new(1, 2, 2.0, 32).unwrap();
        let u = Field::from_components(g, |c, x| (c as f64 + 1.0) * x[0].exp()).unwrap();
        let rep = HomogeneousClass::canonicalize(&u, 2.0).unwrap();
        for (mean, c) in rep.rep().means().iter().zip(0..2) {
            let scale = rep.rep().component_field(c).max_abs();
            assert!(mean.abs() < 1e-12 * scale + 1e-300);
        }
    }

    #[test]
    fn seminorm_of_sine() {
        let l = 2.5;
        let g = Grid::new(1, 1, l, 64).unwrap();
        let u = Field::from_fn(g, |x| (PI * x[0] / l).sin()).unwrap();
        let s = HomogeneousClass::canonicalize(&u, 2.0).unwrap().seminorm();
        let expected = PI / l * l.sqrt();
        assert!((s / expected - 1.0).abs() < 1e-12);
        assert_eq!(HomogeneousClass::zero(g, 2.0).unwrap().seminorm(), 0.0);
    }

    #[test]
    fn mollifier_invariants() {
        for (d, n) in [(1, 64), (2, 64), (3, 32)] {
            let g = Grid::new(d, 1, 8.0, n).unwrap();
            let eta = Mollifier::new(&g, 0.1).unwrap();
            assert!((eta.mass() - 1.0).abs() < 1e-12);
            assert!(eta.peak() <= 1.0);
            assert!(eta.kernel().values().iter().all(|v| *v >= 0.0));
            assert!(eta.radius() < 8.0);
        }
        let g = grid2(1.0, 16);
        assert!(Mollifier::new(&g, 2.0).is_err());
        assert!(Mollifier::new(&g, -1.0).is_err());
    }

    #[test]
    fn decompose_sine_mode() {
        let l = 6.0;
        let g = grid2(l, 64);
        let u = Field::from_fn(g, |x| (PI * x[0] / l).sin()).unwrap();
        let class = HomogeneousClass::canonicalize(&u, 2.0).unwrap();
        let eta = Mollifier::new(&g, 1.0).unwrap();
        let dec = decompose(&class, &eta).unwrap();
        let smooth = grid::lp_norm(&grid::gradient(&dec.smooth_part).unwrap(), 2.0).unwrap();
        assert!(smooth <= class.seminorm());
        assert!(dec.reconstruction_defect(class.rep()) < 1e-12);

        let zero = decompose(&HomogeneousClass::zero(g, 2.0).unwrap(), &eta).unwrap();
        assert_eq!(zero.smooth_part.max_abs(), 0.0);
        assert_eq!(zero.integrable_part.max_abs(), 0.0);
    }

    #[test]
    fn density_sequence_inside_cutoff() {
        let g = grid2(16.0, 64);
        let u = Field::from_fn(g, |x| (-(x[0] * x[0] + x[1] * x[1])).exp()).unwrap();
        let class = HomogeneousClass::canonicalize(&u, 2.0).unwrap();
        let step = density_sequence(&class, 6.0).unwrap();
        let len = g.points();
        for flat in 0..len {
            if g.radius(flat) <= 6.0 {
                let expected = class.rep().values()[flat] - step.annulus_mean[0];
                assert!((step.field.values()[flat] - expected).abs() < 1e-15);
            } else if g.radius(flat) >= 12.0 {
                assert_eq!(step.field.values()[flat], 0.0);
            }
        }
        assert!(density_sequence(&class, 8.0).is_err());
        let zero = density_sequence(&HomogeneousClass::zero(g, 2.0).unwrap(), 4.0).unwrap();
        assert_eq!(zero.field.max_abs(), 0.0);
        assert_eq!(zero.ratio(), 0.0);
    }

    #[test]
    fn cutoff_derivative_matches_difference() {
        for s in [1.1, 1.4, 1.77, 1.95] {
            let e = 1e-6;
            let fd = (cutoff(s + e).0 - cutoff(s - e).0) / (2.0 * e);
            assert!((fd - cutoff(s).1).abs() < 1e-8);
        }
    }

    #[test]
    fn w11_invariant() {
        let l = 4.0;
        let g = Grid::new(1, 1, l, 128).unwrap();
        let periodic = Field::from_fn(g, |x| (PI * x[0] / l).cos() + 0.2 * (3.0 * PI * x[0] / l).sin()).unwrap();
        assert!(w11_mean_invariant(&periodic, Window::Periodic).unwrap().abs() < 1e-12);
        let ramp = Field::from_fn(g, |x| x[0].clamp(0.0, 1.0)).unwrap();
        assert_eq!(w11_mean_invariant(&ramp, Window::Open).unwrap(), 1.0);
        let bump = Field::from_fn(g, |x| (-(x[0] * x[0]) * 4.0).exp()).unwrap();
        assert!(w11_mean_invariant(&bump, Window::Open).unwrap().abs() < 1e-12);
        assert!(w11_mean_invariant(&bump, Window::Periodic).unwrap().abs() < 1e-12);
        let g2 = grid2(1.0, 8);
        assert!(w11_mean_invariant(&Field::zeros(g2), Window::Open).is_err());
    }
}

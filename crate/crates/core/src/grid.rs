//! Periodic truncation of ℝ^d: sampled fields, their spectra, and the
//! calculus (derivatives, norms, convolution) every other module builds on.
//!
//! The box is `[-L, L)^d` sampled at `N` points per axis with spacing
//! `h = 2L/N`. Samples are stored component-major: component `c` occupies
//! `values[c * N^d .. (c + 1) * N^d]`, and inside a component the ordering is
//! row-major with axis 0 slowest.
//!
//! Transforms use the unitary DFT convention, so a constant field `c` has the
//! single nonzero coefficient `c * N^(d/2)` at `k = 0` and Parseval reads
//! `‖u‖_{L²} = h^(d/2) ‖û‖_{ℓ²}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::{self, Direction};

/// Largest supported spatial dimension.
pub const MAX_DIM: usize = 4;

/// A point (or wavevector) in up to [`MAX_DIM`] dimensions; only the first
/// `d` entries are meaningful.
pub type Point = [f64; MAX_DIM];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    d: usize,
    m: usize,
    half_width: f64,
    n: usize,
}

impl Grid {
    pub fn new(d: usize, m: usize, half_width: f64, n: usize) -> Result<Self> {
        if d == 0 || d > MAX_DIM {
            return Err(Error::InvalidGrid(format!("d = {d} not in 1..={MAX_DIM}")));
        }
        if m == 0 {
            return Err(Error::InvalidGrid("m must be positive".into()));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidGrid(format!("half-width {half_width} must be positive")));
        }
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("N = {n} must be a power of two >= 4")));
        }
        if n.checked_pow(d as u32).is_none_or(|len| len > 1 << 28) {
            return Err(Error::InvalidGrid(format!("N^d = {n}^{d} is too large")));
        }
        Ok(Self { d, m, half_width, n })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Grid spacing `h = 2L / N`.
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    /// Quadrature weight `h^d` of one sample.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.d as i32)
    }

    /// Number of samples per component, `N^d`.
    pub fn points(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    /// The same domain carrying `m` components.
    pub fn with_components(&self, m: usize) -> Self {
        Self { m, ..*self }
    }

    /// Same `d`, `N` and `L` (component counts may differ).
    pub fn same_domain(&self, other: &Grid) -> bool {
        self.d == other.d && self.n == other.n && self.half_width == other.half_width
    }

    pub(crate) fn check_domain(&self, other: &Grid) -> Result<()> {
        if self.same_domain(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "(d={}, N={}, L={}) vs (d={}, N={}, L={})",
                self.d, self.n, self.half_width, other.d, other.n, other.half_width
            )))
        }
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }

    /// Per-axis sample indices of a flat index.
    pub fn multi_index(&self, flat: usize) -> [usize; MAX_DIM] {
        let mut idx = [0; MAX_DIM];
        let mut rest = flat;
        for a in (0..self.d).rev() {
            idx[a] = rest % self.n;
            rest /= self.n;
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx[..self.d].iter().fold(0, |acc, &i| acc * self.n + i)
    }

    pub fn point(&self, flat: usize) -> Point {
        let idx = self.multi_index(flat);
        let mut x = [0.0; MAX_DIM];
        for a in 0..self.d {
            x[a] = self.coordinate(idx[a]);
        }
        x
    }

    /// Euclidean distance of sample `flat` from the origin.
    pub fn radius(&self, flat: usize) -> f64 {
        let x = self.point(flat);
        x[..self.d].iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Signed frequency index in `-N/2 .. N/2` for the DFT index `q`.
    pub fn signed_frequency(&self, q: usize) -> i64 {
        let n = self.n as i64;
        let q = q as i64;
        if q < n / 2 {
            q
        } else {
            q - n
        }
    }

    pub fn is_nyquist(&self, q: usize) -> bool {
        q == self.n / 2
    }

    /// Wavevector `k = (π/L) · (signed indices)` of spectral index `flat`.
    pub fn wavevector(&self, flat: usize) -> Point {
        let idx = self.multi_index(flat);
        let dk = std::f64::consts::PI / self.half_width;
        let mut k = [0.0; MAX_DIM];
        for a in 0..self.d {
            k[a] = dk * self.signed_frequency(idx[a]) as f64;
        }
        k
    }

    /// Symbol of the spectral derivative: the wavevector with every Nyquist
    /// component set to zero.
    pub fn derivative_symbol(&self, flat: usize) -> Point {
        let idx = self.multi_index(flat);
        let mut k = self.wavevector(flat);
        for a in 0..self.d {
            if self.is_nyquist(idx[a]) {
                k[a] = 0.0;
            }
        }
        k
    }

    /// Largest resolved wavenumber `π / h`.
    pub fn max_wavenumber(&self) -> f64 {
        std::f64::consts::PI / self.spacing()
    }

    /// Samples `f` at every grid point (one component).
    pub fn sample<F: Fn(&[f64]) -> f64>(&self, f: F) -> Vec<f64> {
        (0..self.points())
            .map(|i| {
                let x = self.point(i);
                f(&x[..self.d])
            })
            .collect()
    }
}

/// An `m`-vector-valued function sampled on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        let expected = grid.m() * grid.points();
        if values.len() != expected {
            return Err(Error::Shape {
                expected,
                got: values.len(),
            });
        }
        check_finite(&values)?;
        Ok(Self { grid, values })
    }

    pub(crate) fn from_parts(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.m() * grid.points());
        Self { grid, values }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::from_parts(grid, vec![0.0; grid.m() * grid.points()])
    }

    /// Scalar field from a function of position.
    pub fn from_fn<F: Fn(&[f64]) -> f64>(grid: Grid, f: F) -> Result<Self> {
        let grid = grid.with_components(1);
        Self::new(grid, grid.sample(f))
    }

    /// Vector field whose component `c` is `f(c, x)`.
    pub fn from_components<F: Fn(usize, &[f64]) -> f64>(grid: Grid, f: F) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.m() * grid.points());
        for c in 0..grid.m() {
            values.extend(grid.sample(|x| f(c, x)));
        }
        Self::new(grid, values)
    }

    /// Stacks scalar fields on one domain into a vector field.
    pub fn stack(parts: &[Field]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidGrid("cannot stack zero fields".into()))?;
        let mut values = Vec::new();
        for p in parts {
            first.grid.check_domain(&p.grid)?;
            values.extend_from_slice(&p.values);
        }
        let grid = first.grid.with_components(values.len() / first.grid.points());
        Ok(Self::from_parts(grid, values))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn component(&self, c: usize) -> &[f64] {
        let len = self.grid.points();
        &self.values[c * len..(c + 1) * len]
    }

    pub(crate) fn component_mut(&mut self, c: usize) -> &mut [f64] {
        let len = self.grid.points();
        &mut self.values[c * len..(c + 1) * len]
    }

    /// Scalar field holding component `c`.
    pub fn component_field(&self, c: usize) -> Field {
        Field::from_parts(self.grid.with_components(1), self.component(c).to_vec())
    }

    pub fn check_finite(&self) -> Result<()> {
        check_finite(&self.values)
    }

    /// Pointwise Euclidean magnitude over the components.
    pub fn magnitudes(&self) -> Vec<f64> {
        let len = self.grid.points();
        let mut out = vec![0.0; len];
        for c in 0..self.grid.m() {
            for (o, v) in out.iter_mut().zip(self.component(c)) {
                *o += v * v;
            }
        }
        out.iter_mut().for_each(|v| *v = v.sqrt());
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |acc: f64, v| acc.max(v.abs()))
    }

    /// Box mean of each component.
    pub fn means(&self) -> Vec<f64> {
        (0..self.grid.m())
            .map(|c| self.component(c).iter().sum::<f64>() / self.grid.points() as f64)
            .collect()
    }

    /// Quadrature `∫ u_c dx` of each component.
    pub fn integrals(&self) -> Vec<f64> {
        let w = self.grid.cell_volume();
        (0..self.grid.m())
            .map(|c| self.component(c).iter().sum::<f64>() * w)
            .collect()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field::from_parts(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scale(&self, s: f64) -> Field {
        self.map(|v| s * v)
    }

    /// Rounds every sample to the nearest multiple of `quantum` (a power of
    /// two keeps the rounding exact). Shifting a quantized field by a
    /// moderate multiple of `quantum` is then exact in floating point.
    pub fn quantized(&self, quantum: f64) -> Field {
        self.map(|v| (v / quantum).round() * quantum)
    }

    /// Adds `shift[c]` to every sample of component `c`.
    pub fn shifted(&self, shift: &[f64]) -> Field {
        let mut out = self.clone();
        for c in 0..self.grid.m() {
            let s = shift[c % shift.len()];
            out.component_mut(c).iter_mut().for_each(|v| *v += s);
        }
        out
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Result<Field> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!("{:?} vs {:?}", self.grid, other.grid)));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Field::from_parts(self.grid, values))
    }

    /// Discrete `L²` inner product `Σ u·v h^d`.
    pub fn dot(&self, other: &Field) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!("{:?} vs {:?}", self.grid, other.grid)));
        }
        Ok(dot(&self.values, &other.values) * self.grid.cell_volume())
    }

    /// Circular shift by whole samples along `axis`.
    pub fn roll(&self, axis: usize, by: usize) -> Result<Field> {
        if axis >= self.grid.d() {
            return Err(Error::AxisOutOfRange {
                axis,
                d: self.grid.d(),
            });
        }
        let n = self.grid.n();
        let len = self.grid.points();
        let mut out = vec![0.0; self.values.len()];
        for c in 0..self.grid.m() {
            for flat in 0..len {
                let mut idx = self.grid.multi_index(flat);
                idx[axis] = (idx[axis] + by) % n;
                out[c * len + self.grid.flat_index(&idx)] = self.values[c * len + flat];
            }
        }
        Ok(Field::from_parts(self.grid, out))
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite {
            index,
            value: values[index],
        }),
        None => Ok(()),
    }
}

/// Unitary Fourier coefficients of a real field, laid out like [`Field`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub(crate) fn from_parts(grid: Grid, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(coeffs.len(), grid.m() * grid.points());
        Self { grid, coeffs }
    }

    pub(crate) fn zeros(grid: Grid) -> Self {
        Self::from_parts(grid, vec![Complex64::default(); grid.m() * grid.points()])
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        let len = self.grid.points();
        &self.coeffs[c * len..(c + 1) * len]
    }

    pub(crate) fn component_mut(&mut self, c: usize) -> &mut [Complex64] {
        let len = self.grid.points();
        &mut self.coeffs[c * len..(c + 1) * len]
    }

    /// Flat index of the wavevector `-k` for spectral index `flat`.
    pub fn conjugate_index(&self, flat: usize) -> usize {
        let n = self.grid.n();
        let mut idx = self.grid.multi_index(flat);
        for q in idx.iter_mut().take(self.grid.d()) {
            *q = (n - *q) % n;
        }
        self.grid.flat_index(&idx)
    }

    /// Largest violation of `û(-k) = conj(û(k))`.
    pub fn symmetry_defect(&self) -> f64 {
        let len = self.grid.points();
        let mut worst: f64 = 0.0;
        for c in 0..self.grid.m() {
            let comp = self.component(c);
            for flat in 0..len {
                let partner = comp[self.conjugate_index(flat)];
                worst = worst.max((comp[flat] - partner.conj()).norm());
            }
        }
        worst
    }

    /// Coefficient 2-norm over all components.
    pub fn l2(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

pub fn forward_transform(field: &Field) -> Result<SpectralField> {
    field.check_finite()?;
    Ok(forward_unchecked(field))
}

pub(crate) fn forward_unchecked(field: &Field) -> SpectralField {
    let grid = field.grid;
    let mut coeffs: Vec<Complex64> = field.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let len = grid.points();
    for c in 0..grid.m() {
        fft::transform(
            &mut coeffs[c * len..(c + 1) * len],
            grid.n(),
            grid.d(),
            Direction::Forward,
        );
    }
    SpectralField::from_parts(grid, coeffs)
}

/// Inverse transform; the imaginary part (round-off for conjugate-symmetric
/// input) is discarded.
pub fn inverse_transform(spectrum: &SpectralField) -> Field {
    let grid = spectrum.grid;
    let len = grid.points();
    let mut coeffs = spectrum.coeffs.clone();
    for c in 0..grid.m() {
        fft::transform(
            &mut coeffs[c * len..(c + 1) * len],
            grid.n(),
            grid.d(),
            Direction::Inverse,
        );
    }
    Field::from_parts(grid, coeffs.iter().map(|z| z.re).collect())
}

/// Multiplies component `c` of `spectrum` by `i k_axis` (Nyquist zeroed).
pub(crate) fn differentiate_in_place(spectrum: &mut SpectralField, c: usize, axis: usize) {
    let grid = spectrum.grid;
    let comp = spectrum.component_mut(c);
    for (flat, v) in comp.iter_mut().enumerate() {
        let k = grid.derivative_symbol(flat)[axis];
        *v = Complex64::new(-k * v.im, k * v.re);
    }
}

/// Exact derivative of the trigonometric interpolant along `axis`
/// (0-based), with the Nyquist mode's derivative set to zero.
pub fn spectral_derivative(field: &Field, axis: usize) -> Result<Field> {
    if axis >= field.grid.d() {
        return Err(Error::AxisOutOfRange {
            axis,
            d: field.grid.d(),
        });
    }
    let mut spec = forward_transform(field)?;
    for c in 0..field.grid.m() {
        differentiate_in_place(&mut spec, c, axis);
    }
    Ok(inverse_transform(&spec))
}

/// Full gradient: an `m·d`-component field with component `i·d + α` equal to
/// `∂_α u_i`.
pub fn gradient(field: &Field) -> Result<Field> {
    let spec = forward_transform(field)?;
    Ok(gradient_of_spectrum(&spec))
}

pub(crate) fn gradient_of_spectrum(spec: &SpectralField) -> Field {
    let grid = spec.grid;
    let (m, d) = (grid.m(), grid.d());
    let out_grid = grid.with_components(m * d);
    let mut out = SpectralField::zeros(out_grid);
    for i in 0..m {
        for a in 0..d {
            out.component_mut(i * d + a).copy_from_slice(spec.component(i));
            differentiate_in_place(&mut out, i * d + a, a);
        }
    }
    inverse_transform(&out)
}

/// Quadrature `(Σ |u|^p h^d)^(1/p)` of the pointwise Euclidean magnitude;
/// `p = ∞` gives the maximum magnitude.
pub fn lp_norm(field: &Field, p: f64) -> Result<f64> {
    lp_norm_masked(field, p, |_| true)
}

/// [`lp_norm`] restricted to the samples where `keep(flat)` holds.
pub fn lp_norm_masked(field: &Field, p: f64, keep: impl Fn(usize) -> bool) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidExponent(p));
    }
    let mags = field.magnitudes();
    let selected = mags.iter().enumerate().filter(|(i, _)| keep(*i)).map(|(_, v)| *v);
    if p.is_infinite() {
        return Ok(selected.fold(0.0, f64::max));
    }
    let w = field.grid.cell_volume();
    if p == 2.0 {
        return Ok((selected.map(|v| v * v).sum::<f64>() * w).sqrt());
    }
    Ok((selected.map(|v| v.powf(p)).sum::<f64>() * w).powf(p.recip()))
}

/// Periodic convolution `(u * K)(x_i) = Σ_j u(x_j) K(x_i - x_j) h^d`.
///
/// The kernel is sampled on the same grid with its origin at the box
/// center; a scalar kernel is applied to every component of `field`.
pub fn convolve(field: &Field, kernel: &Field) -> Result<Field> {
    field.grid.check_domain(&kernel.grid)?;
    let km = kernel.grid.m();
    if km != 1 && km != field.grid.m() {
        return Err(Error::GridMismatch(format!(
            "kernel has {km} components, field has {}",
            field.grid.m()
        )));
    }
    let grid = field.grid;
    let mut spec = forward_transform(field)?;
    let kspec = centered_kernel_spectrum(kernel)?;
    for c in 0..grid.m() {
        let kc = kspec.component(if km == 1 { 0 } else { c });
        for (v, g) in spec.component_mut(c).iter_mut().zip(kc) {
            *v *= g;
        }
    }
    Ok(inverse_transform(&spec))
}

/// Spectrum of a centered kernel, shifted to origin-at-index-0 and scaled so
/// that pointwise multiplication realizes [`convolve`].
pub(crate) fn centered_kernel_spectrum(kernel: &Field) -> Result<SpectralField> {
    let grid = kernel.grid;
    let mut spec = forward_transform(kernel)?;
    let scale = (grid.points() as f64).sqrt() * grid.cell_volume();
    let len = grid.points();
    for c in 0..grid.m() {
        let comp = spec.component_mut(c);
        for (flat, v) in comp.iter_mut().enumerate().take(len) {
            let idx = grid.multi_index(flat);
            let parity = idx[..grid.d()].iter().sum::<usize>() % 2;
            let sign = if parity == 0 { 1.0 } else { -1.0 };
            *v *= sign * scale;
        }
    }
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid1(l: f64, n: usize) -> Grid {
        Grid::new(1, 1, l, n).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::new(0, 1, 1.0, 8).is_err());
        assert!(Grid::new(5, 1, 1.0, 8).is_err());
        assert!(Grid::new(1, 1, 0.0, 8).is_err());
        assert!(Grid::new(1, 1, 1.0, 6).is_err());
        assert!(Grid::new(1, 1, 1.0, 2).is_err());
        assert!(Grid::new(2, 3, 1.0, 16).is_ok());
    }

    #[test]
    fn wavevectors_cover_symmetric_band() {
        let g = grid1(2.0, 8);
        let ks: Vec<f64> = (0..8).map(|q| g.wavevector(q)[0] / (PI / 2.0)).collect();
        assert_eq!(ks, vec![0.0, 1.0, 2.0, 3.0, -4.0, -3.0, -2.0, -1.0]);
        assert_eq!(g.derivative_symbol(4)[0], 0.0);
    }

    #[test]
    fn constant_has_single_coefficient() {
        let g = Grid::new(2, 1, 3.0, 16).unwrap();
        let f = Field::from_fn(g, |_| 2.5).unwrap();
        let s = forward_transform(&f).unwrap();
        let expected = 2.5 * (g.points() as f64).sqrt();
        assert!((s.coeffs()[0].re - expected).abs() < 1e-12 * expected);
        assert!(s.coeffs()[1..].iter().all(|c| c.norm() < 1e-12));
    }

    #[test]
    fn cosine_mode_coefficients() {
        let (l, n) = (1.5, 32);
        let g = grid1(l, n);
        let f = Field::from_fn(g, |x| (PI * x[0] / l).cos()).unwrap();
        let s = forward_transform(&f).unwrap();
        let half = (n as f64).sqrt() / 2.0;
        for (q, c) in s.coeffs().iter().enumerate() {
            if q == 1 || q == n - 1 {
                assert!((c.norm() - half).abs() < 1e-12);
            } else {
                assert!(c.norm() < 1e-12, "q = {q}: {c}");
            }
        }
    }

    #[test]
    fn non_finite_rejected() {
        let g = grid1(1.0, 8);
        let mut v = vec![0.0; 8];
        v[3] = f64::NAN;
        assert!(matches!(Field::new(g, v), Err(Error::NonFinite { index: 3, .. })));
    }

    #[test]
    fn derivative_of_constant_and_sine() {
        let l = 2.0;
        let g = grid1(l, 32);
        let c = Field::from_fn(g, |_| 7.0).unwrap();
        assert!(spectral_derivative(&c, 0).unwrap().max_abs() < 1e-12);
        let s = Field::from_fn(g, |x| (PI * x[0] / l).sin()).unwrap();
        let ds = spectral_derivative(&s, 0).unwrap();
        let exact = Field::from_fn(g, |x| PI / l * (PI * x[0] / l).cos()).unwrap();
        assert!(ds.sub(&exact).unwrap().max_abs() < 1e-12);
        assert!(matches!(
            spectral_derivative(&s, 1),
            Err(Error::AxisOutOfRange { axis: 1, d: 1 })
        ));
    }

    #[test]
    fn gaussian_derivative_2d() {
        let g = Grid::new(2, 1, 10.0, 128).unwrap();
        let u = Field::from_fn(g, |x| (-(x[0] * x[0] + x[1] * x[1])).exp()).unwrap();
        let du = spectral_derivative(&u, 0).unwrap();
        let exact =
            Field::from_fn(g, |x| -2.0 * x[0] * (-(x[0] * x[0] + x[1] * x[1])).exp()).unwrap();
        let err = lp_norm(&du.sub(&exact).unwrap(), 2.0).unwrap();
        assert!(err < 1e-10 * lp_norm(&exact, 2.0).unwrap());
    }

    #[test]
    fn norms() {
        let g = grid1(1.0, 64);
        let one = Field::from_fn(g, |_| 1.0).unwrap();
        assert!((lp_norm(&one, 2.0).unwrap() - 2f64.sqrt()).abs() < 1e-14);
        assert!((lp_norm(&one, 1.0).unwrap() - 2.0).abs() < 1e-14);
        assert!(matches!(lp_norm(&one, 0.5), Err(Error::InvalidExponent(_))));
        let v = Field::from_fn(g, |x| x[0] * (3.0 * x[0]).sin()).unwrap();
        let max = v.values().iter().fold(0.0f64, |a, b| a.max(b.abs()));
        assert_eq!(lp_norm(&v, f64::INFINITY).unwrap(), max);
    }

    #[test]
    fn bump_norm_converges_under_refinement() {
        // ∫ exp(-2x²) dx = sqrt(π/2) on ℝ; the box [-6, 6) truncates at e^-72.
        let exact = (PI / 2.0).sqrt().sqrt();
        let mut last = f64::INFINITY;
        for n in [8usize, 16, 32, 64] {
            let g = grid1(6.0, n);
            let f = Field::from_fn(g, |x| (-x[0] * x[0]).exp()).unwrap();
            let err = (lp_norm(&f, 2.0).unwrap() - exact).abs();
            assert!(err <= last || err < 1e-15);
            last = err;
        }
        assert!(last < 1e-14);
    }

    #[test]
    fn delta_kernel_is_identity() {
        let g = Grid::new(2, 2, 4.0, 16).unwrap();
        let f = Field::from_components(g, |c, x| (x[0] + c as f64).sin() * x[1].cos()).unwrap();
        let ks = g.with_components(1);
        let center = ks.flat_index(&[8, 8]);
        let mut kv = vec![0.0; ks.points()];
        kv[center] = 1.0 / ks.cell_volume();
        let k = Field::new(ks, kv).unwrap();
        let out = convolve(&f, &k).unwrap();
        assert!(out.sub(&f).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn convolution_of_constant_with_unit_mass() {
        let g = Grid::new(1, 1, 5.0, 32).unwrap();
        let f = Field::from_fn(g, |_| 3.0).unwrap();
        let raw: Vec<f64> = g.sample(|x| (-x[0] * x[0]).exp());
        let mass: f64 = raw.iter().sum::<f64>() * g.cell_volume();
        let k = Field::new(g, raw.iter().map(|v| v / mass).collect()).unwrap();
        let out = convolve(&f, &k).unwrap();
        assert!(out.values().iter().all(|v| (v - 3.0).abs() < 1e-12));
    }

    #[test]
    fn convolution_matches_direct_double_sum() {
        let g = Grid::new(1, 1, 8.0, 32).unwrap();
        let f = Field::from_fn(g, |x| (-(x[0] - 1.0).powi(2) / 2.0).exp()).unwrap();
        let k = Field::from_fn(g, |x| (-x[0] * x[0]).exp()).unwrap();
        let fast = convolve(&f, &k).unwrap();
        let n = g.n();
        let h = g.spacing();
        for i in 0..n {
            let mut direct = 0.0;
            for j in 0..n {
                let s = (i + n - j) % n;
                direct += f.values()[j] * k.values()[(s + n / 2) % n] * h;
            }
            assert!((fast.values()[i] - direct).abs() < 1e-8);
        }
    }

    #[test]
    fn roll_and_stack() {
        let g = Grid::new(2, 1, 1.0, 4).unwrap();
        let f = Field::new(g, (0..16).map(f64::from).collect()).unwrap();
        let r = f.roll(1, 1).unwrap();
        assert_eq!(r.values()[1], 0.0);
        assert_eq!(r.values()[0], 3.0);
        let s = Field::stack(&[f.clone(), r]).unwrap();
        assert_eq!(s.grid().m(), 2);
        assert_eq!(s.component_field(0), f);
    }
}

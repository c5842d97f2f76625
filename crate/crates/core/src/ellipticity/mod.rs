//! The coefficient tensor `C_{iαjβ}` and its ellipticity certificates.
//!
//! Three routes to a coercivity constant are provided, one per classical
//! sufficient condition:
//!
//! * [`scalar_pd_constant`]: scalar problems (`m = 1`) with a uniformly
//!   positive definite coefficient matrix;
//! * [`lh_constant`]: constant tensors satisfying Legendre–Hadamard;
//! * [`perturbation_coercivity`]: variable tensors close to a constant
//!   Legendre–Hadamard tensor.
//!
//! Tensor norms are operator norms of the contraction `G ↦ C:G` acting on
//! `m×d` matrices, i.e. the spectral norm of the `(md)×(md)` matrix
//! `M[(i,α),(j,β)] = C_{iαjβ}`. The same convention defines `c1 = ‖C‖_{L^∞}`.

mod sphere;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{self, Field, Grid, Point};

#[derive(Debug, Clone, PartialEq)]
enum TensorData {
    Constant(Vec<f64>),
    /// One `m·d·m·d`-component sample per grid point.
    Varying(Field),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor4 {
    m: usize,
    d: usize,
    data: TensorData,
}

impl Tensor4 {
    pub fn constant(m: usize, d: usize, values: Vec<f64>) -> Result<Self> {
        let expected = m * d * m * d;
        if values.len() != expected {
            return Err(Error::Shape {
                expected,
                got: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                index,
                value: values[index],
            });
        }
        Ok(Self {
            m,
            d,
            data: TensorData::Constant(values),
        })
    }

    /// A spatially varying tensor from a field with `m·d·m·d` components.
    pub fn varying(field: Field, m: usize) -> Result<Self> {
        let d = field.grid().d();
        let expected = m * d * m * d;
        if field.grid().m() != expected {
            return Err(Error::Shape {
                expected,
                got: field.grid().m(),
            });
        }
        Ok(Self {
            m,
            d,
            data: TensorData::Varying(field),
        })
    }

    /// Varying tensor whose value at `x` is written by `f(x, out)`.
    pub fn from_fn(grid: Grid, m: usize, f: impl Fn(&[f64], &mut [f64])) -> Result<Self> {
        let d = grid.d();
        let per = m * d * m * d;
        let len = grid.points();
        let mut values = vec![0.0; per * len];
        let mut buf = vec![0.0; per];
        for flat in 0..len {
            let x = grid.point(flat);
            buf.iter_mut().for_each(|v| *v = 0.0);
            f(&x[..d], &mut buf);
            for (c, v) in buf.iter().enumerate() {
                values[c * len + flat] = *v;
            }
        }
        Self::varying(Field::new(grid.with_components(per), values)?, m)
    }

    /// `δ_ij δ_αβ`: the componentwise Laplacian.
    pub fn laplacian(m: usize, d: usize) -> Self {
        let mut t = Self::zeros(m, d);
        for i in 0..m {
            for a in 0..d {
                let idx = t.index(i, a, i, a);
                t.raw_mut()[idx] = 1.0;
            }
        }
        t
    }

    /// Isotropic elasticity `λ δ_iα δ_jβ + μ (δ_ij δ_αβ + δ_iβ δ_jα)`, `m = d`.
    pub fn isotropic(d: usize, lambda: f64, mu: f64) -> Self {
        let mut t = Self::zeros(d, d);
        let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        for i in 0..d {
            for a in 0..d {
                for j in 0..d {
                    for b in 0..d {
                        let idx = t.index(i, a, j, b);
                        t.raw_mut()[idx] = lambda * delta(i, a) * delta(j, b)
                            + mu * (delta(i, j) * delta(a, b) + delta(i, b) * delta(j, a));
                    }
                }
            }
        }
        t
    }

    /// `(1 + amplitude · sin(π x₁ / L))` times the Laplacian tensor.
    pub fn perturbed_laplacian(grid: Grid, m: usize, amplitude: f64) -> Self {
        let base = Self::laplacian(m, grid.d());
        let l = grid.half_width();
        Self::from_fn(grid, m, |x, out| {
            let s = 1.0 + amplitude * (std::f64::consts::PI * x[0] / l).sin();
            for (o, b) in out.iter_mut().zip(base.raw()) {
                *o = s * b;
            }
        })
        .expect("perturbed laplacian values are finite")
    }

    fn zeros(m: usize, d: usize) -> Self {
        Self {
            m,
            d,
            data: TensorData::Constant(vec![0.0; m * d * m * d]),
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.data, TensorData::Constant(_))
    }

    pub fn grid(&self) -> Option<Grid> {
        match &self.data {
            TensorData::Constant(_) => None,
            TensorData::Varying(f) => Some(*f.grid()),
        }
    }

    /// Flat position of `C_{iαjβ}` within one point's record.
    pub fn index(&self, i: usize, alpha: usize, j: usize, beta: usize) -> usize {
        ((i * self.d + alpha) * self.m + j) * self.d + beta
    }

    pub fn per_point(&self) -> usize {
        self.m * self.d * self.m * self.d
    }

    /// Constant values, or the full varying field's values.
    pub fn raw(&self) -> &[f64] {
        match &self.data {
            TensorData::Constant(v) => v,
            TensorData::Varying(f) => f.values(),
        }
    }

    fn raw_mut(&mut self) -> &mut Vec<f64> {
        match &mut self.data {
            TensorData::Constant(v) => v,
            TensorData::Varying(_) => unreachable!("only used on constant tensors"),
        }
    }

    /// The varying field (`None` for constant tensors).
    pub fn field(&self) -> Option<&Field> {
        match &self.data {
            TensorData::Constant(_) => None,
            TensorData::Varying(f) => Some(f),
        }
    }

    /// Number of points carrying a tensor value (1 for constant tensors).
    pub fn sites(&self) -> usize {
        match &self.data {
            TensorData::Constant(_) => 1,
            TensorData::Varying(f) => f.grid().points(),
        }
    }

    /// The tensor record at site `flat`.
    pub fn at(&self, flat: usize, out: &mut [f64]) {
        match &self.data {
            TensorData::Constant(v) => out.copy_from_slice(v),
            TensorData::Varying(f) => {
                let len = f.grid().points();
                for (c, o) in out.iter_mut().enumerate() {
                    *o = f.values()[c * len + flat];
                }
            }
        }
    }

    /// Spatial average (the tensor itself if constant).
    pub fn mean(&self) -> Tensor4 {
        match &self.data {
            TensorData::Constant(_) => self.clone(),
            TensorData::Varying(f) => Self {
                m: self.m,
                d: self.d,
                data: TensorData::Constant(f.means()),
            },
        }
    }

    pub fn scaled(&self, s: f64) -> Tensor4 {
        let data = match &self.data {
            TensorData::Constant(v) => TensorData::Constant(v.iter().map(|x| s * x).collect()),
            TensorData::Varying(f) => TensorData::Varying(f.scale(s)),
        };
        Self { data, ..*self }
    }

    /// `self - other`, broadcasting constants over a varying partner.
    pub fn sub(&self, other: &Tensor4) -> Result<Tensor4> {
        if self.m != other.m || self.d != other.d {
            return Err(Error::Shape {
                expected: self.per_point(),
                got: other.per_point(),
            });
        }
        let grid = match (self.grid(), other.grid()) {
            (None, None) => {
                let v = self.raw().iter().zip(other.raw()).map(|(a, b)| a - b).collect();
                return Tensor4::constant(self.m, self.d, v);
            }
            (Some(g), None) | (None, Some(g)) => g,
            (Some(g), Some(h)) => {
                g.check_domain(&h)?;
                g
            }
        };
        let per = self.per_point();
        let (mut a, mut b) = (vec![0.0; per], vec![0.0; per]);
        let len = grid.points();
        let mut values = vec![0.0; per * len];
        for flat in 0..len {
            self.at(flat.min(self.sites() - 1), &mut a);
            other.at(flat.min(other.sites() - 1), &mut b);
            for c in 0..per {
                values[c * len + flat] = a[c] - b[c];
            }
        }
        Tensor4::varying(Field::new(grid.with_components(per), values)?, self.m)
    }

    /// `C_{jβiα}`.
    pub fn transpose(&self) -> Tensor4 {
        let per = self.per_point();
        let md = self.m * self.d;
        let perm: Vec<usize> = (0..per).map(|c| (c % md) * md + c / md).collect();
        let data = match &self.data {
            TensorData::Constant(v) => TensorData::Constant(perm.iter().map(|&p| v[p]).collect()),
            TensorData::Varying(f) => {
                let len = f.grid().points();
                let mut values = vec![0.0; f.values().len()];
                for c in 0..per {
                    values[c * len..(c + 1) * len]
                        .copy_from_slice(&f.values()[perm[c] * len..(perm[c] + 1) * len]);
                }
                TensorData::Varying(Field::new(*f.grid(), values).expect("permuted finite values"))
            }
        };
        Self { data, ..*self }
    }

    /// Whether `C_{iαjβ} = C_{jβiα}` everywhere to `tol` (absolute).
    pub fn is_major_symmetric(&self, tol: f64) -> bool {
        self.raw()
            .iter()
            .zip(self.transpose().raw())
            .all(|(a, b)| (a - b).abs() <= tol)
    }

    /// `c1 = ‖C‖_{L^∞}` in the operator-norm convention.
    pub fn sup_norm(&self) -> f64 {
        let mut rec = vec![0.0; self.per_point()];
        (0..self.sites())
            .map(|flat| {
                self.at(flat, &mut rec);
                operator_norm(&rec, self.m * self.d)
            })
            .fold(0.0, f64::max)
    }
}

/// Spectral norm of a row-major `n×n` matrix by power iteration on `MᵀM`.
pub fn operator_norm(matrix: &[f64], n: usize) -> f64 {
    if matrix.iter().all(|v| *v == 0.0) {
        return 0.0;
    }
    let apply = |x: &[f64], transpose: bool| -> Vec<f64> {
        (0..n)
            .map(|r| {
                (0..n)
                    .map(|c| {
                        let e = if transpose { matrix[c * n + r] } else { matrix[r * n + c] };
                        e * x[c]
                    })
                    .sum()
            })
            .collect()
    };
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * i as f64 / n as f64).collect();
    let mut estimate = 0.0;
    for _ in 0..1000 {
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        x.iter_mut().for_each(|v| *v /= norm);
        let y = apply(&apply(&x, false), true);
        let rayleigh: f64 = y.iter().zip(&x).map(|(a, b)| a * b).sum();
        let done = (rayleigh - estimate).abs() <= 1e-15 * rayleigh;
        estimate = rayleigh;
        x = y;
        if done || x.iter().all(|v| *v == 0.0) {
            break;
        }
    }
    estimate.max(0.0).sqrt()
}

/// `Γ(k)_{ij} = Σ_{αβ} C_{iαjβ} k_α k_β`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AcousticTensor {
    m: usize,
    entries: Vec<f64>,
}

impl AcousticTensor {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.m + j]
    }

    /// Smallest eigenvalue of the symmetric part.
    pub fn min_symmetric_eigenvalue(&self) -> f64 {
        min_sym_eigenvalue(&self.entries, self.m)
    }
}

pub fn acoustic_tensor(c: &Tensor4, k: &[f64]) -> Result<AcousticTensor> {
    let values = match &c.data {
        TensorData::Constant(v) => v,
        TensorData::Varying(_) => return Err(Error::NotConstant),
    };
    Ok(AcousticTensor {
        m: c.m,
        entries: acoustic_entries(values, c.m, c.d, k),
    })
}

pub(crate) fn acoustic_entries(values: &[f64], m: usize, d: usize, k: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            let mut s = 0.0;
            for a in 0..d {
                for b in 0..d {
                    s += values[((i * d + a) * m + j) * d + b] * k[a] * k[b];
                }
            }
            out[i * m + j] = s;
        }
    }
    out
}

pub(crate) fn min_sym_eigenvalue(a: &[f64], m: usize) -> f64 {
    match m {
        1 => a[0],
        2 => {
            let (p, q, r) = (a[0], 0.5 * (a[1] + a[2]), a[3]);
            let mean = 0.5 * (p + r);
            let rad = (0.25 * (p - r) * (p - r) + q * q).sqrt();
            mean - rad
        }
        _ => {
            let mat = DMatrix::from_fn(m, m, |i, j| 0.5 * (a[i * m + j] + a[j * m + i]));
            mat.symmetric_eigenvalues().min()
        }
    }
}

/// Default number of lattice directions for the first sweep.
pub const DEFAULT_SPHERE_SAMPLES: usize = 64;

/// Legendre–Hadamard constant `c0 = min_{|k|=1} λ_min(sym Γ(k))`.
///
/// The sphere is swept with a deterministic lattice of `refinement`
/// directions, the best sample is polished by Nelder–Mead, and the lattice is
/// doubled until the minimum moves by less than `1e-6`. A non-positive
/// result means the condition fails.
pub fn lh_constant(c: &Tensor4, refinement: usize) -> Result<f64> {
    let values = match &c.data {
        TensorData::Constant(v) => v.clone(),
        TensorData::Varying(_) => return Err(Error::NotConstant),
    };
    let (m, d) = (c.m, c.d);
    let eval = |k: &Point| min_sym_eigenvalue(&acoustic_entries(&values, m, d, &k[..d]), m);
    if d == 1 {
        let mut k = [0.0; grid::MAX_DIM];
        k[0] = 1.0;
        return Ok(eval(&k));
    }
    let mut count = refinement.max(8);
    let mut previous = f64::INFINITY;
    let mut best = f64::INFINITY;
    for _ in 0..16 {
        let points = sphere::lattice(d, count);
        let (arg, sampled) = points
            .iter()
            .map(|k| (k, eval(k)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty lattice");
        let step = std::f64::consts::PI / (count as f64).powf(1.0 / (d - 1) as f64);
        let (_, polished) = sphere::nelder_mead(
            |theta| eval(&sphere::from_angles(theta)),
            &sphere::to_angles(&arg[..d]),
            step,
            4000,
        );
        best = best.min(sampled).min(polished);
        if (previous - best).abs() < 1e-6 {
            break;
        }
        previous = best;
        count *= 2;
    }
    Ok(best)
}

/// Uniform positive-definiteness constant of a scalar (`m = 1`) problem:
/// the minimum over sites of `λ_min(sym C_α^β)`.
pub fn scalar_pd_constant(c: &Tensor4) -> Result<f64> {
    if c.m != 1 {
        return Err(Error::WrongComponents {
            expected: 1,
            got: c.m,
        });
    }
    let mut rec = vec![0.0; c.per_point()];
    Ok((0..c.sites())
        .map(|flat| {
            c.at(flat, &mut rec);
            min_sym_eigenvalue(&rec, c.d)
        })
        .fold(f64::INFINITY, f64::min))
}

/// Coercivity certificate obtained by perturbing a constant LH tensor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerturbationBound {
    /// LH constant `c̄0` of the reference tensor.
    pub reference_c0: f64,
    /// `‖C̄ − C‖_{L^∞}`.
    pub deviation: f64,
    /// `c1 = ‖C‖_{L^∞}`.
    pub c1: f64,
    /// `c̄0 − ‖C̄ − C‖_{L^∞}`, the certified constant.
    pub bound: f64,
    /// `c̄0 − c1 ‖C̄ − C‖_{L^∞}`, the weighted variant, reported only.
    pub weighted_bound: f64,
}

impl PerturbationBound {
    pub fn certifies(&self) -> bool {
        self.bound > 0.0
    }
}

pub fn perturbation_coercivity(reference: &Tensor4, c: &Tensor4) -> Result<PerturbationBound> {
    let reference_c0 = lh_constant(reference, DEFAULT_SPHERE_SAMPLES)?;
    if reference_c0 <= 0.0 {
        return Err(Error::LegendreHadamard { c0: reference_c0 });
    }
    let deviation = reference.sub(c)?.sup_norm();
    let c1 = c.sup_norm();
    Ok(PerturbationBound {
        reference_c0,
        deviation,
        c1,
        bound: reference_c0 - deviation,
        weighted_bound: reference_c0 - c1 * deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laplacian_acoustic_tensor() {
        let c = Tensor4::laplacian(2, 3);
        let k = [1.0, -2.0, 0.5];
        let g = acoustic_tensor(&c, &k).unwrap();
        let k2 = 1.0 + 4.0 + 0.25;
        assert_eq!(g.entries(), &[k2, 0.0, 0.0, k2]);
        let z = acoustic_tensor(&c, &[0.0; 3]).unwrap();
        assert!(z.entries().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn isotropic_acoustic_tensor_matches_closed_form() {
        let (lambda, mu) = (0.7, 1.3);
        let c = Tensor4::isotropic(3, lambda, mu);
        let k = [0.3, -1.1, 2.0];
        let g = acoustic_tensor(&c, &k).unwrap();
        let k2: f64 = k.iter().map(|v| v * v).sum();
        for i in 0..3 {
            for j in 0..3 {
                let expected =
                    mu * k2 * if i == j { 1.0 } else { 0.0 } + (lambda + mu) * k[i] * k[j];
                assert!((g.get(i, j) - expected).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn acoustic_tensor_is_quadratic() {
        let c = Tensor4::isotropic(2, -0.4, 0.9);
        let k = [0.37, -1.21];
        let g1 = acoustic_tensor(&c, &k).unwrap();
        let g2 = acoustic_tensor(&c, &[2.0 * k[0], 2.0 * k[1]]).unwrap();
        for (a, b) in g1.entries().iter().zip(g2.entries()) {
            assert_eq!(4.0 * a, *b);
        }
    }

    #[test]
    fn varying_tensor_rejected_by_constant_ops() {
        let g = Grid::new(2, 1, 1.0, 8).unwrap();
        let c = Tensor4::perturbed_laplacian(g, 1, 0.1);
        assert!(matches!(acoustic_tensor(&c, &[1.0, 0.0]), Err(Error::NotConstant)));
        assert!(matches!(lh_constant(&c, 16), Err(Error::NotConstant)));
    }

    #[test]
    fn lh_constants_of_builtin_tensors() {
        let lap = lh_constant(&Tensor4::laplacian(3, 2), 64).unwrap();
        assert!((lap - 1.0).abs() < 1e-12);
        for d in [2, 3] {
            let iso = lh_constant(&Tensor4::isotropic(d, 1.0, 1.0), 64).unwrap();
            assert!((iso - 1.0).abs() < 1e-6, "d = {d}: {iso}");
            let soft = lh_constant(&Tensor4::isotropic(d, -1.5, 1.0), 64).unwrap();
            assert!((soft - 0.5).abs() < 1e-6, "d = {d}: {soft}");
        }
        let iso4 = lh_constant(&Tensor4::isotropic(4, -1.5, 1.0), 64).unwrap();
        assert!((iso4 - 0.5).abs() < 1e-6, "{iso4}");
    }

    #[test]
    fn lh_failure_is_reported_as_nonpositive() {
        // λ + 2μ < 0: longitudinal waves are unstable.
        let c0 = lh_constant(&Tensor4::isotropic(2, -3.0, 1.0), 64).unwrap();
        assert!((c0 + 1.0).abs() < 1e-6);
    }

    #[test]
    fn lh_constant_is_homogeneous() {
        let c = Tensor4::isotropic(3, 0.3, 0.8);
        let a = lh_constant(&c, 64).unwrap();
        let b = lh_constant(&c.scaled(3.0), 64).unwrap();
        assert!((b - 3.0 * a).abs() < 1e-9);
    }

    #[test]
    fn scalar_pd_examples() {
        let id = Tensor4::laplacian(1, 2);
        assert_eq!(scalar_pd_constant(&id).unwrap(), 1.0);
        let diag = Tensor4::constant(1, 2, vec![2.0, 0.0, 0.0, 0.5]).unwrap();
        assert_eq!(scalar_pd_constant(&diag).unwrap(), 0.5);
        let g = Grid::new(2, 1, 3.0, 32).unwrap();
        let var = Tensor4::from_fn(g, 1, |x, out| {
            out[0] = 1.0 + 0.5 * (std::f64::consts::PI * x[0] / 3.0).sin();
            out[3] = 1.0;
        })
        .unwrap();
        // x₁ = -L/2 is a grid point, where the sine reaches -1.
        assert!((scalar_pd_constant(&var).unwrap() - 0.5).abs() < 1e-14);
        assert!(matches!(
            scalar_pd_constant(&Tensor4::laplacian(2, 2)),
            Err(Error::WrongComponents { .. })
        ));
    }

    #[test]
    fn perturbation_examples() {
        let g = Grid::new(2, 1, 5.0, 16).unwrap();
        let cbar = Tensor4::laplacian(1, 2);
        let same = perturbation_coercivity(&cbar, &cbar).unwrap();
        assert_eq!(same.bound, same.reference_c0);
        let pert = Tensor4::perturbed_laplacian(g, 1, 0.3);
        let b = perturbation_coercivity(&cbar, &pert).unwrap();
        assert!((b.bound - 0.7).abs() < 1e-12, "{b:?}");
        assert!((b.c1 - 1.3).abs() < 1e-12);
        assert!(b.certifies());
        let big = Tensor4::perturbed_laplacian(g, 1, 1.5);
        assert!(!perturbation_coercivity(&cbar, &big).unwrap().certifies());
        let bad = Tensor4::isotropic(2, -3.0, 1.0);
        assert!(matches!(
            perturbation_coercivity(&bad, &bad),
            Err(Error::LegendreHadamard { .. })
        ));
    }

    #[test]
    fn operator_norm_of_known_matrices() {
        assert!((operator_norm(&[3.0, 0.0, 0.0, -4.0], 2) - 4.0).abs() < 1e-12);
        assert!((operator_norm(&[1.0, 1.0, 0.0, 1.0], 2) - (1.5 + 1.25f64.sqrt()).sqrt()).abs() < 1e-10);
        let iso = Tensor4::isotropic(2, 1.0, 1.0);
        // Eigenvalues of the isotropic contraction: 2μ + dλ on the identity,
        // 2μ on symmetric traceless, 0 on skew matrices.
        assert!((iso.sup_norm() - 4.0).abs() < 1e-10);
    }

    #[test]
    fn transpose_and_symmetry() {
        assert!(Tensor4::isotropic(3, 0.2, 1.0).is_major_symmetric(0.0));
        let mut v = Tensor4::laplacian(1, 2).raw().to_vec();
        v[1] = 0.5;
        let c = Tensor4::constant(1, 2, v).unwrap();
        assert!(!c.is_major_symmetric(1e-12));
        assert_eq!(c.transpose().raw()[2], 0.5);
    }
}

//! The weak problem `a(u, v) = ℓ(v)` for `a(u, v) = ∫ (C:∂u) : ∂v`, where
//! `(C:∂u)_{iα} = C_{iαjβ} ∂_β u_j`.
//!
//! Constant tensors are inverted mode by mode. Variable tensors are solved by
//! preconditioned conjugate gradients with the mean tensor as preconditioner.
//! Everything lives on the zero-mean subspace: the `k = 0` mode is neither
//! solved for nor iterated on.

mod regularity;

pub use regularity::{regularity_check, DirectionCheck, MeasuredNorms, RegularityReport};

use nalgebra::DMatrix;
use serde::Serialize;

use crate::ellipticity::{
    acoustic_entries, lh_constant, perturbation_coercivity, scalar_pd_constant, Tensor4,
    DEFAULT_SPHERE_SAMPLES,
};
use crate::error::{Error, Result};
use crate::functionals::{self, FunctionalSpec};
use crate::grid::{self, Field, Grid, SpectralField};
use crate::quotient::HomogeneousClass;

/// Default relative tolerance on the preconditioned residual.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Which sufficient condition produced a coercivity constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    /// Pointwise positive definite scalar coefficients.
    PositiveDefinite,
    /// Constant tensor satisfying Legendre–Hadamard.
    LegendreHadamard,
    /// Variable tensor within `c̄0` of its constant mean.
    Perturbation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Certificate {
    pub c0: f64,
    pub provenance: Provenance,
}

/// Best available coercivity constant for `c`.
pub fn certify(c: &Tensor4) -> Result<Certificate> {
    if c.is_constant() {
        let c0 = lh_constant(c, DEFAULT_SPHERE_SAMPLES)?;
        if c0 <= 0.0 {
            return Err(Error::LegendreHadamard { c0 });
        }
        return Ok(Certificate {
            c0,
            provenance: Provenance::LegendreHadamard,
        });
    }
    let mut best = Certificate {
        c0: f64::NEG_INFINITY,
        provenance: Provenance::Perturbation,
    };
    match perturbation_coercivity(&c.mean(), c) {
        Ok(bound) => best.c0 = bound.bound,
        Err(Error::LegendreHadamard { .. }) => {}
        Err(e) => return Err(e),
    }
    if c.m() == 1 {
        let pd = scalar_pd_constant(c)?;
        if pd > best.c0 {
            best = Certificate {
                c0: pd,
                provenance: Provenance::PositiveDefinite,
            };
        }
    }
    if best.c0 > 0.0 {
        Ok(best)
    } else {
        Err(Error::NotCertified { c0: best.c0 })
    }
}

/// A validated instance of the weak problem.
#[derive(Debug, Clone)]
pub struct WeakProblem {
    tensor: Tensor4,
    rhs: FunctionalSpec,
    grid: Grid,
    certificate: Certificate,
}

impl WeakProblem {
    pub fn new(tensor: Tensor4, rhs: FunctionalSpec) -> Result<Self> {
        let grid = compatible_grid(&tensor, &rhs)?;
        rhs.require_admissible()?;
        let certificate = certify(&tensor)?;
        Ok(Self {
            tensor,
            rhs,
            grid,
            certificate,
        })
    }

    pub fn tensor(&self) -> &Tensor4 {
        &self.tensor
    }

    pub fn rhs(&self) -> &FunctionalSpec {
        &self.rhs
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn certificate(&self) -> Certificate {
        self.certificate
    }

    /// Direct solve for constant tensors, PCG otherwise.
    pub fn solve(&self, tol: f64) -> Result<SolveReport> {
        if self.tensor.is_constant() {
            solve_constant(&self.tensor, &self.rhs)
        } else {
            solve_variable(&self.tensor, &self.rhs, tol)
        }
    }
}

fn compatible_grid(c: &Tensor4, rhs: &FunctionalSpec) -> Result<Grid> {
    let grid = rhs.grid();
    if rhs.components() != c.m() {
        return Err(Error::WrongComponents {
            expected: c.m(),
            got: rhs.components(),
        });
    }
    if grid.d() != c.d() {
        return Err(Error::WrongDimension {
            expected: c.d(),
            got: grid.d(),
        });
    }
    if let Some(g) = c.grid() {
        g.check_domain(&grid)?;
    }
    Ok(grid)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Direct,
    Cg,
    /// MINRES on `Aᵀ M⁻¹ A u = Aᵀ M⁻¹ f`, used for tensors without major
    /// symmetry.
    MinresNormal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Constants {
    pub c0: f64,
    pub provenance: Provenance,
    /// `‖C‖_{L^∞}`.
    pub c1: f64,
    /// `c1/c0` for direct solves; for iterative solves the condition number
    /// `(c̄0 + δ)/(c̄0 − δ)` of the preconditioned operator, `δ = ‖C − C̄‖_{L^∞}`.
    pub cond_estimate: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    #[serde(skip)]
    pub solution: HomogeneousClass,
    /// `‖f − Au‖_{M⁻¹} / ‖f‖_{M⁻¹}`, recomputed from the returned solution.
    pub residual: f64,
    pub iterations: usize,
    /// `½a(u,u) − ℓ(u)`.
    pub energy: f64,
    pub constants: Constants,
    pub method: Method,
    /// Energy of every CG iterate, starting with the initial guess, updated
    /// by the step decrement `−α⟨r, p⟩ + ½α²⟨p, Ap⟩`.
    pub energies: Vec<f64>,
    /// Largest gap between `energies` and direct evaluation of
    /// `½⟨Ax, x⟩ − ⟨f, x⟩`, relative to the largest energy magnitude.
    pub energy_defect: f64,
}

/// Pointwise `σ_{iα} = C_{iαjβ} G_{jβ}` for an `m·d`-component gradient.
fn contract(c: &Tensor4, grad: &[f64], len: usize) -> Vec<f64> {
    let md = c.m() * c.d();
    let mut out = vec![0.0; md * len];
    for row in 0..md {
        let dst = &mut out[row * len..(row + 1) * len];
        for col in 0..md {
            let src = &grad[col * len..(col + 1) * len];
            let entry = row * md + col;
            if c.is_constant() {
                let v = c.raw()[entry];
                if v != 0.0 {
                    dst.iter_mut().zip(src).for_each(|(o, g)| *o += v * g);
                }
            } else {
                let coef = &c.raw()[entry * len..(entry + 1) * len];
                dst.iter_mut()
                    .zip(src)
                    .zip(coef)
                    .for_each(|((o, g), v)| *o += v * g);
            }
        }
    }
    out
}

/// `u ↦ −div(C:∂u)` in mixed form.
struct Operator<'a> {
    c: &'a Tensor4,
    grid: Grid,
}

impl Operator<'_> {
    fn apply(&self, u: &[f64]) -> Vec<f64> {
        let len = self.grid.points();
        let field = Field::from_parts(self.grid, u.to_vec());
        let grad = grid::gradient_of_spectrum(&grid::forward_unchecked(&field));
        let sigma = contract(self.c, grad.values(), len);
        let flux = Field::from_parts(*grad.grid(), sigma);
        grid::inverse_transform(&functionals::neg_divergence_spectrum(&flux)).into_values()
    }
}

/// Per-mode inverse of the symbol `Γ(k)`, zero at `k = 0`.
struct SymbolInverse {
    grid: Grid,
    inv: Vec<f64>,
}

impl SymbolInverse {
    fn new(values: &[f64], grid: Grid) -> Result<Self> {
        let (m, d) = (grid.m(), grid.d());
        let len = grid.points();
        let mut inv = vec![0.0; len * m * m];
        for flat in 0..len {
            let k = grid.derivative_symbol(flat);
            let k2: f64 = k[..d].iter().map(|v| v * v).sum();
            if k2 == 0.0 {
                continue;
            }
            let gamma = acoustic_entries(values, m, d, &k[..d]);
            let out = &mut inv[flat * m * m..(flat + 1) * m * m];
            let singular = || Error::SingularSymbol { k: k[..d].to_vec() };
            // Scale-free singularity threshold: Γ is of order |k|².
            let floor = 1e-13 * k2;
            match m {
                1 => {
                    if gamma[0].abs() <= floor {
                        return Err(singular());
                    }
                    out[0] = 1.0 / gamma[0];
                }
                2 => {
                    let det = gamma[0] * gamma[3] - gamma[1] * gamma[2];
                    if det.abs() <= floor * floor {
                        return Err(singular());
                    }
                    out.copy_from_slice(&[
                        gamma[3] / det,
                        -gamma[1] / det,
                        -gamma[2] / det,
                        gamma[0] / det,
                    ]);
                }
                _ => {
                    let mat = DMatrix::from_row_slice(m, m, &gamma);
                    let smallest = mat.singular_values().min();
                    if smallest <= floor {
                        return Err(singular());
                    }
                    let inverse = mat.try_inverse().ok_or_else(singular)?;
                    for i in 0..m {
                        for j in 0..m {
                            out[i * m + j] = inverse[(i, j)];
                        }
                    }
                }
            }
        }
        Ok(Self { grid, inv })
    }

    fn apply_spectrum(&self, spec: &SpectralField) -> SpectralField {
        let m = self.grid.m();
        let len = self.grid.points();
        let mut out = SpectralField::zeros(self.grid);
        for i in 0..m {
            for j in 0..m {
                let src = spec.component(j);
                let dst = out.component_mut(i);
                for flat in 0..len {
                    let g = self.inv[(flat * m + i) * m + j];
                    if g != 0.0 {
                        dst[flat] += src[flat] * g;
                    }
                }
            }
        }
        out
    }

    fn apply(&self, r: &[f64]) -> Vec<f64> {
        let field = Field::from_parts(self.grid, r.to_vec());
        let spec = self.apply_spectrum(&grid::forward_unchecked(&field));
        grid::inverse_transform(&spec).into_values()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    grid::dot(a, b)
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(y, x)| *y += alpha * x);
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(a, b)| a - b).collect()
}

fn density_values(rhs: &FunctionalSpec) -> Vec<f64> {
    grid::inverse_transform(&rhs.density_spectrum()).into_values()
}

fn zero_mean(values: &mut [f64], grid: &Grid) {
    let len = grid.points();
    for comp in values.chunks_mut(len) {
        let mean = comp.iter().sum::<f64>() / len as f64;
        comp.iter_mut().for_each(|v| *v -= mean);
    }
}

/// `a(u, v) = ∫ C_{iαjβ} ∂_β u_j ∂_α v_i`.
pub fn bilinear(c: &Tensor4, u: &HomogeneousClass, v: &HomogeneousClass) -> Result<f64> {
    let grid = *u.grid();
    if grid != *v.grid() {
        return Err(Error::GridMismatch(format!("{:?} vs {:?}", grid, v.grid())));
    }
    if grid.m() != c.m() || grid.d() != c.d() {
        return Err(Error::WrongComponents {
            expected: c.m(),
            got: grid.m(),
        });
    }
    if let Some(g) = c.grid() {
        g.check_domain(&grid)?;
    }
    let gu = u.gradient();
    let gv = v.gradient();
    let sigma = contract(c, gu.values(), grid.points());
    Ok(dot(&sigma, gv.values()) * grid.cell_volume())
}

/// `½a(u,u) − ℓ(u)`.
pub fn energy(c: &Tensor4, rhs: &FunctionalSpec, u: &HomogeneousClass) -> Result<f64> {
    Ok(0.5 * bilinear(c, u, u)? - functionals::apply(rhs, u)?)
}

/// Relative residual `‖f − Au‖_{M⁻¹} / ‖f‖_{M⁻¹}`.
fn relative_residual(op: &Operator, pre: &SymbolInverse, f: &[f64], u: &[f64]) -> f64 {
    let r = sub(f, &op.apply(u));
    let fm = dot(f, &pre.apply(f));
    if fm <= 0.0 {
        return 0.0;
    }
    (dot(&r, &pre.apply(&r)).max(0.0) / fm).sqrt()
}

#[allow(clippy::too_many_arguments)]
fn finish(
    c: &Tensor4,
    rhs: &FunctionalSpec,
    solution: Vec<f64>,
    grid: Grid,
    residual: f64,
    iterations: usize,
    constants: Constants,
    method: Method,
    energies: Vec<f64>,
    energy_defect: f64,
) -> Result<SolveReport> {
    let solution = HomogeneousClass::canonicalize(&Field::new(grid, solution)?, 2.0)?;
    let energy = energy(c, rhs, &solution)?;
    Ok(SolveReport {
        solution,
        residual,
        iterations,
        energy,
        constants,
        method,
        energies,
        energy_defect,
    })
}

/// Exact Fourier-multiplier solve `Γ(k) û(k) = f̂(k)`, `û(0) = 0`.
pub fn solve_constant(c: &Tensor4, rhs: &FunctionalSpec) -> Result<SolveReport> {
    if !c.is_constant() {
        return Err(Error::NotConstant);
    }
    let grid = compatible_grid(c, rhs)?;
    let c0 = lh_constant(c, DEFAULT_SPHERE_SAMPLES)?;
    if c0 <= 0.0 {
        return Err(Error::LegendreHadamard { c0 });
    }
    rhs.require_admissible()?;
    let symbol = SymbolInverse::new(c.raw(), grid)?;
    let u = grid::inverse_transform(&symbol.apply_spectrum(&rhs.density_spectrum())).into_values();
    let op = Operator { c, grid };
    let f = density_values(rhs);
    let residual = relative_residual(&op, &symbol, &f, &u);
    let c1 = c.sup_norm();
    let constants = Constants {
        c0,
        provenance: Provenance::LegendreHadamard,
        c1,
        cond_estimate: c1 / c0,
    };
    finish(c, rhs, u, grid, residual, 0, constants, Method::Direct, Vec::new(), 0.0)
}

/// Preconditioned CG (MINRES on the normal form for nonsymmetric tensors)
/// from the zero initial guess.
pub fn solve_variable(c: &Tensor4, rhs: &FunctionalSpec, tol: f64) -> Result<SolveReport> {
    solve_variable_from(c, rhs, tol, None)
}

/// [`solve_variable`] started from `guess` (any representative).
pub fn solve_variable_from(
    c: &Tensor4,
    rhs: &FunctionalSpec,
    tol: f64,
    guess: Option<&Field>,
) -> Result<SolveReport> {
    let grid = compatible_grid(c, rhs)?;
    rhs.require_admissible()?;
    let mean = c.mean();
    let bound = perturbation_coercivity(&mean, c)?;
    if !bound.certifies() {
        return Err(Error::NotCertified { c0: bound.bound });
    }
    let certificate = certify(c)?;
    let (c0_bar, delta) = (bound.reference_c0, bound.deviation);
    let kappa = (c0_bar + delta) / (c0_bar - delta);
    let constants = Constants {
        c0: certificate.c0,
        provenance: certificate.provenance,
        c1: bound.c1,
        cond_estimate: kappa,
    };
    let scale = c.sup_norm().max(1.0);
    let symmetric = c.is_major_symmetric(1e-12 * scale);
    let f = density_values(rhs);
    let mut x = match guess {
        Some(g) => {
            g.grid().check_domain(&grid)?;
            if g.grid().m() != grid.m() {
                return Err(Error::WrongComponents {
                    expected: grid.m(),
                    got: g.grid().m(),
                });
            }
            g.values().to_vec()
        }
        None => vec![0.0; f.len()],
    };
    zero_mean(&mut x, &grid);
    let op = Operator { c, grid };
    if symmetric {
        let pre = SymbolInverse::new(mean.raw(), grid)?;
        let cap = iteration_cap(kappa.sqrt(), tol);
        let run = pcg(&op, &pre, &f, &mut x, tol, cap, grid.cell_volume())?;
        let residual = relative_residual(&op, &pre, &f, &x);
        finish(
            c,
            rhs,
            x,
            grid,
            residual,
            run.iterations,
            constants,
            Method::Cg,
            run.energies,
            run.energy_defect,
        )
    } else {
        let sym_mean = mean.symmetric_part();
        let pre = SymbolInverse::new(sym_mean.raw(), grid)?;
        let ct = c.transpose();
        let op_t = Operator { c: &ct, grid };
        let cap = iteration_cap(kappa, tol);
        let iterations = minres_normal(&op, &op_t, &pre, &f, &mut x, tol, cap)?;
        let residual = relative_residual(&op, &pre, &f, &x);
        finish(c, rhs, x, grid, residual, iterations, constants, Method::MinresNormal, Vec::new(), 0.0)
    }
}

/// `10·⌈½ √κ ln(2/tol)⌉` given `√κ`.
fn iteration_cap(sqrt_kappa: f64, tol: f64) -> usize {
    10 * (0.5 * sqrt_kappa * (2.0 / tol).ln()).ceil().max(1.0) as usize
}

struct CgRun {
    iterations: usize,
    energies: Vec<f64>,
    energy_defect: f64,
}

/// Preconditioned CG on the zero-mean subspace.
fn pcg(
    op: &Operator,
    pre: &SymbolInverse,
    f: &[f64],
    x: &mut [f64],
    tol: f64,
    cap: usize,
    volume: f64,
) -> Result<CgRun> {
    // ½⟨Ax, x⟩ − ⟨f, x⟩ = −½⟨f + r, x⟩.
    let direct = |x: &[f64], r: &[f64]| {
        -0.5 * volume * x.iter().zip(f).zip(r).map(|((x, f), r)| x * (f + r)).sum::<f64>()
    };
    let fnorm = dot(f, &pre.apply(f)).max(0.0).sqrt();
    let mut r = sub(f, &op.apply(x));
    let mut energies = vec![direct(x, &r)];
    let mut directs = energies.clone();
    let done = |iterations, energies: Vec<f64>, directs: Vec<f64>| {
        let scale = energies.iter().map(|e| e.abs()).fold(0.0, f64::max);
        let gap = energies
            .iter()
            .zip(&directs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        CgRun {
            iterations,
            energies,
            energy_defect: if scale > 0.0 { gap / scale } else { 0.0 },
        }
    };
    if fnorm == 0.0 {
        return Ok(done(0, energies, directs));
    }
    let mut z = pre.apply(&r);
    let mut rz = dot(&r, &z);
    if rz.max(0.0).sqrt() <= tol * fnorm {
        return Ok(done(0, energies, directs));
    }
    let mut p = z.clone();
    for k in 1..=cap {
        let q = op.apply(&p);
        let pq = dot(&p, &q);
        let alpha = rz / pq;
        let step = -alpha * dot(&r, &p) + 0.5 * alpha * alpha * pq;
        energies.push(energies[k - 1] + volume * step);
        axpy(alpha, &p, x);
        axpy(-alpha, &q, &mut r);
        directs.push(direct(x, &r));
        z = pre.apply(&r);
        let mut rz_new = dot(&r, &z);
        if rz_new.max(0.0).sqrt() <= tol * fnorm {
            // Guard against drift of the recursive residual.
            r = sub(f, &op.apply(x));
            z = pre.apply(&r);
            rz_new = dot(&r, &z);
            if rz_new.max(0.0).sqrt() <= tol * fnorm {
                return Ok(done(k, energies, directs));
            }
            p.copy_from_slice(&z);
            rz = rz_new;
            continue;
        }
        let beta = rz_new / rz;
        p.iter_mut().zip(&z).for_each(|(p, z)| *p = z + beta * *p);
        rz = rz_new;
    }
    Err(Error::IterationCap {
        cap,
        residual: rz.max(0.0).sqrt() / fnorm,
    })
}

/// Preconditioned MINRES for `B = Aᵀ M⁻¹ A`, `b = Aᵀ M⁻¹ f`, preconditioner
/// `M⁻¹`, restarted with a tighter inner tolerance until the residual of the
/// original equation meets `tol`.
fn minres_normal(
    op: &Operator,
    op_t: &Operator,
    pre: &SymbolInverse,
    f: &[f64],
    x: &mut [f64],
    tol: f64,
    cap: usize,
) -> Result<usize> {
    let normal = |v: &[f64]| op_t.apply(&pre.apply(&op.apply(v)));
    let mut total = 0;
    let mut inner = tol;
    loop {
        let residual = relative_residual(op, pre, f, x);
        if residual <= tol {
            return Ok(total);
        }
        if total >= cap || inner < 1e-15 {
            return Err(Error::IterationCap { cap, residual });
        }
        let r = sub(f, &op.apply(x));
        let b = op_t.apply(&pre.apply(&r));
        let mut dx = vec![0.0; x.len()];
        total += minres(&normal, pre, &b, &mut dx, inner, cap - total);
        axpy(1.0, &dx, x);
        inner *= 0.1;
    }
}

/// Preconditioned MINRES from a zero start; returns the iterations used.
fn minres(
    apply: &dyn Fn(&[f64]) -> Vec<f64>,
    pre: &SymbolInverse,
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    cap: usize,
) -> usize {
    let n = b.len();
    let mut r1 = b.to_vec();
    let mut y = pre.apply(&r1);
    let beta1 = dot(&r1, &y).max(0.0).sqrt();
    if beta1 == 0.0 {
        return 0;
    }
    let mut r2 = r1.clone();
    let (mut oldb, mut beta) = (0.0, beta1);
    let (mut dbar, mut epsln, mut phibar) = (0.0, 0.0, beta1);
    let (mut cs, mut sn) = (-1.0f64, 0.0f64);
    let mut w = vec![0.0; n];
    let mut w2 = vec![0.0; n];
    for itn in 1..=cap {
        let v: Vec<f64> = y.iter().map(|y| y / beta).collect();
        y = apply(&v);
        if itn >= 2 {
            axpy(-beta / oldb, &r1, &mut y);
        }
        let alfa = dot(&v, &y);
        axpy(-alfa / beta, &r2, &mut y);
        r1 = std::mem::replace(&mut r2, y.clone());
        y = pre.apply(&r2);
        oldb = beta;
        beta = dot(&r2, &y).max(0.0).sqrt();
        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = gbar.hypot(beta).max(f64::EPSILON);
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar *= sn;
        let w1 = std::mem::replace(&mut w2, w.clone());
        for t in 0..n {
            w[t] = (v[t] - oldeps * w1[t] - delta * w2[t]) / gamma;
        }
        axpy(phi, &w, x);
        if phibar <= tol * beta1 || beta == 0.0 {
            return itn;
        }
    }
    cap
}

impl Tensor4 {
    /// `½(C + Cᵀ)`.
    fn symmetric_part(&self) -> Tensor4 {
        let t = self.transpose();
        let diff = self.sub(&t).expect("same shape");
        self.sub(&diff.scaled(0.5)).expect("same shape")
    }
}

#[cfg(test)]
mod tests;

//! Right-hand sides `ℓ` on homogeneous classes: densities `∫ f·u` with
//! `∫ f = 0`, and fluxes `ℓ = −div F` acting as `∫ F : ∂u`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{self, Field, SpectralField};
use crate::quotient::HomogeneousClass;

/// Relative mean `|∫f| / ‖f‖_{L¹}` above which a density is rejected.
pub const ZERO_MEAN_TOL: f64 = 1e-10;
/// Fraction of `∫|f|` allowed outside `|x| > L/2` for "genuine" decay.
pub const TAIL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub enum Form {
    /// `ℓ(u) = ∫ f · u`, `m` components.
    Density(Field),
    /// `ℓ(u) = ∫ F : ∂u`, `m·d` components ordered `i·d + α`.
    Flux(Field),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Flags {
    pub zero_mean: bool,
    pub moment_finite: bool,
    pub fourier_l2: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalSpec {
    form: Form,
    flags: Flags,
}

impl FunctionalSpec {
    pub fn density(f: Field) -> Result<Self> {
        f.check_finite()?;
        let report = admissibility_report(&f)?;
        Ok(Self {
            form: Form::Density(f),
            flags: Flags {
                zero_mean: report.zero_mean <= ZERO_MEAN_TOL,
                moment_finite: report.tail_fraction < TAIL_TOL,
                fourier_l2: report.flux_norm.is_finite(),
            },
        })
    }

    /// `components` is the system size `m`; `flux` must carry `m·d` components.
    pub fn flux(flux: Field, components: usize) -> Result<Self> {
        flux.check_finite()?;
        let expected = components * flux.grid().d();
        if flux.grid().m() != expected {
            return Err(Error::WrongComponents {
                expected,
                got: flux.grid().m(),
            });
        }
        Ok(Self {
            form: Form::Flux(flux),
            flags: Flags {
                zero_mean: true,
                moment_finite: true,
                fourier_l2: true,
            },
        })
    }

    pub fn form(&self) -> &Form {
        &self.form
    }

    pub fn flags(&self) -> Flags {
        self.flags
    }

    /// Number of solution components `m`.
    pub fn components(&self) -> usize {
        match &self.form {
            Form::Density(f) => f.grid().m(),
            Form::Flux(f) => f.grid().m() / f.grid().d(),
        }
    }

    pub fn grid(&self) -> grid::Grid {
        match &self.form {
            Form::Density(f) | Form::Flux(f) => f.grid().with_components(self.components()),
        }
    }

    /// Fails unless the functional is well defined on classes.
    pub fn require_admissible(&self) -> Result<()> {
        if let Form::Density(f) = &self.form {
            let relative = relative_mean(f);
            if relative > ZERO_MEAN_TOL {
                return Err(Error::NonzeroMean { relative });
            }
        }
        Ok(())
    }

    /// Spectrum of the equivalent density `−div F` (or `f` itself).
    pub(crate) fn density_spectrum(&self) -> SpectralField {
        match &self.form {
            Form::Density(f) => grid::forward_unchecked(f),
            Form::Flux(flux) => neg_divergence_spectrum(flux),
        }
    }
}

/// Spectrum of `−div F` for an `m·d`-component flux.
pub(crate) fn neg_divergence_spectrum(flux: &Field) -> SpectralField {
    let g = *flux.grid();
    let d = g.d();
    let m = g.m() / d;
    let spec = grid::forward_unchecked(flux);
    let mut out = SpectralField::zeros(g.with_components(m));
    for i in 0..m {
        for a in 0..d {
            let src = spec.component(i * d + a);
            let dst = out.component_mut(i);
            for (flat, (o, s)) in dst.iter_mut().zip(src).enumerate() {
                let k = g.derivative_symbol(flat)[a];
                // −i k_α F̂_α
                *o += Complex64::new(k * s.im, -k * s.re);
            }
        }
    }
    out
}

/// `|∫f| / ‖f‖_{L¹}`, maximized over components (0 for `f = 0`).
fn relative_mean(f: &Field) -> f64 {
    (0..f.grid().m())
        .map(|c| {
            let comp = f.component(c);
            let l1: f64 = comp.iter().map(|v| v.abs()).sum();
            if l1 == 0.0 {
                0.0
            } else {
                comp.iter().sum::<f64>().abs() / l1
            }
        })
        .fold(0.0, f64::max)
}

/// `ℓ([u])`, independent of the representative.
pub fn apply(l: &FunctionalSpec, class: &HomogeneousClass) -> Result<f64> {
    l.require_admissible()?;
    let m = class.grid().m();
    if l.components() != m {
        return Err(Error::WrongComponents {
            expected: m,
            got: l.components(),
        });
    }
    match &l.form {
        Form::Density(f) => {
            f.grid().check_domain(class.grid())?;
            f.dot(class.rep())
        }
        Form::Flux(flux) => {
            flux.grid().check_domain(class.grid())?;
            flux.dot(&class.gradient())
        }
    }
}

/// `F` with `−div F = f` and `F̂_α = i k_α f̂ / |k|²`, plus `‖F‖_{L²}`.
pub fn riesz_flux(f: &Field) -> Result<(Field, f64)> {
    f.check_finite()?;
    let relative = relative_mean(f);
    if relative > ZERO_MEAN_TOL {
        return Err(Error::NonzeroMean { relative });
    }
    let g = *f.grid();
    let (m, d) = (g.m(), g.d());
    let spec = grid::forward_unchecked(f);
    let mut out = SpectralField::zeros(g.with_components(m * d));
    for i in 0..m {
        let src = spec.component(i).to_vec();
        for a in 0..d {
            let dst = out.component_mut(i * d + a);
            for (flat, (o, s)) in dst.iter_mut().zip(&src).enumerate() {
                let k = g.derivative_symbol(flat);
                let k2: f64 = k[..d].iter().map(|v| v * v).sum();
                if k2 > 0.0 {
                    *o = Complex64::new(0.0, k[a] / k2) * s;
                }
            }
        }
    }
    let flux = grid::inverse_transform(&out);
    let norm = grid::lp_norm(&flux, 2.0)?;
    Ok((flux, norm))
}

/// `−div F` for an `m·d`-component flux.
pub fn divergence(flux: &Field, components: usize) -> Result<Field> {
    let spec = FunctionalSpec::flux(flux.clone(), components)?;
    Ok(grid::inverse_transform(&spec.density_spectrum()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    /// `|∫f| / ‖f‖_{L¹}` (largest over components).
    pub zero_mean: f64,
    /// `∫ |x| |f(x)| dx`.
    pub moment: f64,
    /// Share of `∫|f|` outside `|x| > L/2`.
    pub tail_fraction: f64,
    /// `max |f̂(k)|/|k|` over `0 < |k| ≤ 0.1 k_max`, with `f̂` the continuous
    /// Fourier transform approximated by the box quadrature.
    pub fourier_slope: f64,
    /// Finite-difference Lipschitz constant of `f̂` at `k = 0` (first shell).
    pub lipschitz_at_zero: f64,
    /// `(Σ_{k≠0} |f̂(k)|²/|k|²)^{1/2}`, equal to `‖F‖_{L²}` of the Riesz flux.
    pub flux_norm: f64,
    /// `zero_mean ≤ 1e-10`: the density pairs with classes.
    pub admissible: bool,
}

pub fn admissibility_report(f: &Field) -> Result<AdmissibilityReport> {
    f.check_finite()?;
    let g = *f.grid();
    let (d, len) = (g.d(), g.points());
    let zero_mean = relative_mean(f);
    let mags = f.magnitudes();
    let w = g.cell_volume();
    let mut moment = 0.0;
    let mut total = 0.0;
    let mut tail = 0.0;
    for (i, v) in mags.iter().enumerate() {
        let r = g.radius(i);
        moment += r * v * w;
        total += v * w;
        if r > 0.5 * g.half_width() {
            tail += v * w;
        }
    }
    let spec = grid::forward_unchecked(f);
    // Unitary coefficients to the continuous transform ∫ f e^{-ikx} dx.
    let scale = (len as f64).sqrt() * w;
    let cutoff = 0.1 * g.max_wavenumber();
    let dk = std::f64::consts::PI / g.half_width();
    let amplitude = |flat: usize| -> f64 {
        (0..g.m())
            .map(|c| spec.component(c)[flat].norm_sqr())
            .sum::<f64>()
            .sqrt()
            * scale
    };
    let at_zero = amplitude(0);
    let mut fourier_slope = 0.0f64;
    let mut lipschitz_at_zero = 0.0f64;
    let mut flux_sq = 0.0;
    for flat in 0..len {
        let k = g.derivative_symbol(flat);
        let kn = k[..d].iter().map(|v| v * v).sum::<f64>().sqrt();
        if kn == 0.0 {
            continue;
        }
        let a = amplitude(flat);
        flux_sq += (a / scale).powi(2) / (kn * kn);
        if kn <= cutoff {
            fourier_slope = fourier_slope.max(a / kn);
        }
        if kn <= dk * (1.0 + 1e-12) {
            lipschitz_at_zero = lipschitz_at_zero.max((a - at_zero).abs() / kn);
        }
    }
    Ok(AdmissibilityReport {
        zero_mean,
        moment,
        tail_fraction: if total > 0.0 { tail / total } else { 0.0 },
        fourier_slope,
        lipschitz_at_zero,
        flux_norm: (flux_sq * w).sqrt(),
        admissible: zero_mean <= ZERO_MEAN_TOL,
    })
}

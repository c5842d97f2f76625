//! Growth of the smooth part `J∞u` at infinity, measured on shells, and the
//! cube-chain estimate for mean oscillation in the critical case.

mod chain;

pub use chain::{build_cube_chain, chain_oscillation, ChainOscillation, Cube, CubeChain};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{self, Field};
use crate::quotient::{self, HomogeneousClass, Mollifier};

/// Largest pointwise magnitude of `field` on each shell `r − h ≤ |x| < r + h`.
pub fn radial_sup_profile(field: &Field, radii: &[f64]) -> Result<Vec<(f64, f64)>> {
    let grid = *field.grid();
    let l = grid.half_width();
    if let Some(&r) = radii.iter().find(|&&r| !(r > 0.0 && r < l)) {
        return Err(Error::RadiusOutOfRange {
            radius: r,
            half_width: l,
        });
    }
    let h = grid.spacing();
    let mags = field.magnitudes();
    let radius: Vec<f64> = (0..grid.points()).map(|i| grid.radius(i)).collect();
    radii
        .par_iter()
        .map(|&r| {
            let mut found = false;
            let mut sup = 0.0f64;
            for (m, &x) in mags.iter().zip(&radius) {
                if x >= r - h && x < r + h {
                    found = true;
                    sup = sup.max(*m);
                }
            }
            if found {
                Ok((r, sup))
            } else {
                Err(Error::EmptyShell { radius: r })
            }
        })
        .collect()
}

/// Least-squares slope of `log s` against `log r`.
pub fn fit_growth_exponent(profile: &[(f64, f64)]) -> Result<f64> {
    if profile.len() < 4 {
        return Err(Error::TooFewPoints {
            needed: 4,
            got: profile.len(),
        });
    }
    if let Some(&(radius, value)) = profile.iter().find(|(r, s)| !(*s > 0.0) || !(*r > 0.0)) {
        return Err(Error::NonPositiveProfile { radius, value });
    }
    let n = profile.len() as f64;
    let xs: Vec<f64> = profile.iter().map(|(r, _)| r.ln()).collect();
    let ys: Vec<f64> = profile.iter().map(|(_, s)| s.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// `p < d`: the smooth part decays.
    Decay,
    /// `p > d`: growth like `|x|^{1/p′}`.
    Power,
    /// `p = d`: growth like `log(2 + |x|)`.
    Log,
}

impl Regime {
    pub fn of(p: f64, d: usize) -> Self {
        let d = d as f64;
        if p < d {
            Regime::Decay
        } else if p > d {
            Regime::Power
        } else {
            Regime::Log
        }
    }

    /// Envelope shape at radius `r` for exponent `p`.
    pub fn envelope(&self, p: f64, r: f64) -> f64 {
        match self {
            Regime::Decay => 1.0,
            Regime::Power => r.powf(1.0 - 1.0 / p),
            Regime::Log => (2.0 + r).ln(),
        }
    }
}

/// One sampled radius of a growth report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthRow {
    pub r: f64,
    /// Shell sup of `|J∞u|`.
    pub sup: f64,
    /// `‖∂u‖_{L^p}` times the regime's envelope shape.
    pub envelope: f64,
    /// `sup / envelope`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthEnvelope {
    pub regime: Regime,
    /// `1/p′` in the power regime, 0 otherwise.
    pub exponent: f64,
    /// Smallest `C` with `sup ≤ C·envelope` at every sampled radius.
    pub constant: f64,
    pub seminorm: f64,
    pub rows: Vec<GrowthRow>,
    /// `‖u₀‖_{L^{p*}} / ‖∂u₀‖_{L^p}` in the decay regime.
    pub gns_ratio: Option<f64>,
}

/// `max(2, 4h)` to `L/2`, logarithmically spaced.
pub fn default_radii(grid: &grid::Grid, count: usize) -> Vec<f64> {
    let lo = (4.0 * grid.spacing()).max(2.0);
    let hi = 0.5 * grid.half_width();
    if count < 2 || lo >= hi {
        return vec![hi];
    }
    (0..count)
        .map(|i| lo * (hi / lo).powf(i as f64 / (count - 1) as f64))
        .collect()
}

/// Representative decaying at the box scale: `rep` minus its mean over the
/// far-field frame.
fn decaying_representative(class: &HomogeneousClass) -> Field {
    let grid = *class.grid();
    let rep = class.rep();
    let shift: Vec<f64> = (0..grid.m())
        .map(|c| {
            let (s, n) = rep
                .component(c)
                .iter()
                .enumerate()
                .filter(|(i, _)| quotient::in_far_frame(&grid, *i))
                .fold((0.0, 0usize), |(s, n), (_, v)| (s + v, n + 1));
            -s / n as f64
        })
        .collect();
    rep.shifted(&shift)
}

/// Measures `|J∞u|` against the envelope of the regime fixed by `(p, d)`.
pub fn check_envelope(
    class: &HomogeneousClass,
    eta: &Mollifier,
    radii: &[f64],
) -> Result<GrowthEnvelope> {
    let p = class.p();
    let d = class.grid().d();
    let regime = Regime::of(p, d);
    let dec = quotient::decompose(class, eta)?;
    let seminorm = class.seminorm();
    let profile = radial_sup_profile(&dec.smooth_part, radii)?;
    let rows: Vec<GrowthRow> = profile
        .iter()
        .map(|&(r, sup)| {
            let envelope = seminorm * regime.envelope(p, r);
            let ratio = if envelope > 0.0 { sup / envelope } else { 0.0 };
            GrowthRow {
                r,
                sup,
                envelope,
                ratio,
            }
        })
        .collect();
    let constant = rows.iter().map(|row| row.ratio).fold(0.0, f64::max);
    let gns_ratio = match regime {
        Regime::Decay if seminorm > 0.0 => {
            let dp = d as f64;
            let pstar = dp * p / (dp - p);
            let u0 = decaying_representative(class);
            let num = grid::lp_norm(&u0, pstar)?;
            let den = grid::lp_norm(&grid::gradient(&u0)?, p)?;
            Some(num / den)
        }
        _ => None,
    };
    Ok(GrowthEnvelope {
        regime,
        exponent: if regime == Regime::Power { 1.0 - 1.0 / p } else { 0.0 },
        constant,
        seminorm,
        rows,
        gns_ratio,
    })
}

/// `sup |J∞u + J0u| / r` on each shell.
pub fn farfield_ratio(
    class: &HomogeneousClass,
    eta: &Mollifier,
    radii: &[f64],
) -> Result<Vec<(f64, f64)>> {
    let dec = quotient::decompose(class, eta)?;
    let whole = dec.smooth_part.add(&dec.integrable_part)?;
    Ok(radial_sup_profile(&whole, radii)?
        .into_iter()
        .map(|(r, s)| (r, s / r))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    #[test]
    fn profile_of_constant_and_radius() {
        let g = Grid::new(2, 1, 8.0, 64).unwrap();
        let c = Field::from_fn(g, |_| -2.5).unwrap();
        for (_, s) in radial_sup_profile(&c, &[1.0, 3.0, 7.0]).unwrap() {
            assert_eq!(s, 2.5);
        }
        let r = Field::from_fn(g, |x| (x[0] * x[0] + x[1] * x[1]).sqrt()).unwrap();
        for (radius, s) in radial_sup_profile(&r, &[1.0, 3.0, 6.0]).unwrap() {
            assert!((s - radius).abs() <= g.spacing());
        }
        assert!(radial_sup_profile(&c, &[9.0]).is_err());
        assert!(radial_sup_profile(&c, &[0.0]).is_err());
    }

    #[test]
    fn gaussian_profile_decreases() {
        let g = Grid::new(2, 1, 8.0, 64).unwrap();
        let u = Field::from_fn(g, |x| (-(x[0] * x[0] + x[1] * x[1]) / 4.0).exp()).unwrap();
        let prof = radial_sup_profile(&u, &[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert!(prof.windows(2).all(|w| w[1].1 < w[0].1));
    }

    #[test]
    fn exact_power_laws() {
        let line: Vec<(f64, f64)> = [1.0, 2.0, 5.0, 11.0, 40.0].iter().map(|&r| (r, r)).collect();
        assert!((fit_growth_exponent(&line).unwrap() - 1.0).abs() < 1e-10);
        let root: Vec<(f64, f64)> = [1.0, 2.0, 4.0, 8.0].iter().map(|&r: &f64| (r, r.sqrt())).collect();
        assert!((fit_growth_exponent(&root).unwrap() - 0.5).abs() < 1e-10);
        assert!(fit_growth_exponent(&root[..3]).is_err());
        let mut bad = root.clone();
        bad[2].1 = 0.0;
        assert!(matches!(fit_growth_exponent(&bad), Err(Error::NonPositiveProfile { .. })));
    }

    #[test]
    fn zero_class_envelope() {
        let g = Grid::new(2, 1, 16.0, 64).unwrap();
        let class = HomogeneousClass::zero(g, 2.0).unwrap();
        let eta = Mollifier::new(&g, 1.0).unwrap();
        let env = check_envelope(&class, &eta, &default_radii(&g, 6)).unwrap();
        assert_eq!(env.regime, Regime::Log);
        assert_eq!(env.constant, 0.0);
        for (_, ratio) in farfield_ratio(&class, &eta, &[2.0, 4.0]).unwrap() {
            assert_eq!(ratio, 0.0);
        }
    }

    #[test]
    fn regimes() {
        assert_eq!(Regime::of(1.5, 2), Regime::Decay);
        assert_eq!(Regime::of(2.0, 2), Regime::Log);
        assert_eq!(Regime::of(4.0, 2), Regime::Power);
        assert!((Regime::Power.envelope(4.0, 16.0) - 8.0).abs() < 1e-12);
    }
}

//! Closed-form 1-d examples, integrated piece by piece with Gauss–Legendre
//! quadrature on their compact supports.

use serde::Serialize;

use crate::error::{Error, Result};

const GAUSS_NODES: [f64; 5] = [
    -0.906_179_845_938_664_0,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664_0,
];
const GAUSS_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    128.0 / 225.0,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Continuous piecewise-linear function, zero outside its knot range.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    knots: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewiseLinear {
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if knots.len() != values.len() || knots.len() < 2 {
            return Err(Error::Shape {
                expected: knots.len().max(2),
                got: values.len(),
            });
        }
        if let Some(w) = knots.windows(2).find(|w| !(w[0] < w[1])) {
            return Err(Error::DegenerateInterval { a: w[0], b: w[1] });
        }
        Ok(Self { knots, values })
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
    }

    pub fn slope(&self, piece: usize) -> f64 {
        (self.values[piece + 1] - self.values[piece]) / (self.knots[piece + 1] - self.knots[piece])
    }

    /// `‖u′ − g‖_{L^p}` where `g` is piecewise constant between `breaks`
    /// (`g = levels[j]` on `(breaks[j], breaks[j+1])`, zero elsewhere).
    pub fn derivative_distance(&self, p: f64, breaks: &[f64], levels: &[f64]) -> Result<f64> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidExponent(p));
        }
        let mut cuts: Vec<f64> = self.knots.iter().chain(breaks).copied().collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let slope_at = |x: f64| {
            self.knots
                .windows(2)
                .position(|w| w[0] <= x && x < w[1])
                .map_or(0.0, |i| self.slope(i))
        };
        let level_at = |x: f64| {
            breaks
                .windows(2)
                .position(|w| w[0] <= x && x < w[1])
                .map_or(0.0, |i| levels[i])
        };
        let mut total = 0.0;
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
            let integrand = |x: f64| (slope_at(x) - level_at(x)).abs().powf(p);
            total += half
                * GAUSS_NODES
                    .iter()
                    .zip(GAUSS_WEIGHTS)
                    .map(|(t, wt)| wt * integrand(mid + half * t))
                    .sum::<f64>();
        }
        Ok(total.powf(1.0 / p))
    }

    pub fn derivative_norm(&self, p: f64) -> Result<f64> {
        self.derivative_distance(p, &[], &[])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DenyLions {
    pub n: u64,
    pub sup_value: f64,
    pub grad_norm: f64,
}

/// `u_n(x) = n·max(0, 1 − |x|/n³)`: the seminorm vanishes as `n → ∞` while
/// `sup u_n = n` diverges.
pub fn deny_lions_example(n: u64, p: f64) -> Result<DenyLions> {
    if n == 0 {
        return Err(Error::DegenerateInterval { a: 0.0, b: 0.0 });
    }
    let nf = n as f64;
    let n3 = nf * nf * nf;
    let u = PiecewiseLinear::new(vec![-n3, 0.0, n3], vec![0.0, nf, 0.0])?;
    Ok(DenyLions {
        n,
        sup_value: u.sup(),
        grad_norm: u.derivative_norm(p)?,
    })
}

/// `‖u_n′ − χ_{(a,b)}‖_{L^p}` for the 1-d sequence that rises with slope 1 on
/// `(a, b)` and decays with slope `−1/n` on `(b, b + n(b − a))`.
pub fn d1_counterexample(a: f64, b: f64, n: u64, p: f64) -> Result<f64> {
    if !(a < b) || n == 0 {
        return Err(Error::DegenerateInterval { a, b });
    }
    let len = b - a;
    let u = PiecewiseLinear::new(vec![a, b, b + n as f64 * len], vec![0.0, len, 0.0])?;
    u.derivative_distance(p, &[a, b], &[1.0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deny_lions_closed_form() {
        let one = deny_lions_example(1, 2.0).unwrap();
        assert!((one.grad_norm - 2f64.sqrt()).abs() < 1e-12);
        let hundred = deny_lions_example(100, 2.0).unwrap();
        assert!((hundred.grad_norm - 0.02f64.sqrt()).abs() < 1e-12);
        assert_eq!(hundred.sup_value, 100.0);
        let mut prev = f64::INFINITY;
        for n in 1..50 {
            let g = deny_lions_example(n, 2.0).unwrap().grad_norm;
            assert!(g < prev);
            prev = g;
        }
    }

    #[test]
    fn counterexample_closed_form() {
        assert!((d1_counterexample(0.0, 1.0, 10, 2.0).unwrap() - 0.1f64.sqrt()).abs() < 1e-12);
        for n in [1, 5, 50] {
            assert!((d1_counterexample(0.0, 1.0, n, 1.0).unwrap() - 1.0).abs() < 1e-12);
        }
        assert!((d1_counterexample(0.0, 2.0, 4, 3.0).unwrap() - 0.5).abs() < 1e-12);
        assert!(d1_counterexample(1.0, 1.0, 3, 2.0).is_err());
    }

    #[test]
    fn gauss_rule_integrates_quartics() {
        let s: f64 = GAUSS_NODES.iter().zip(GAUSS_WEIGHTS).map(|(x, w)| w * x.powi(4)).sum();
        assert!((s - 0.4).abs() < 1e-14);
    }
}

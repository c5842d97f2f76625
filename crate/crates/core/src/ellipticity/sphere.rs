//! Deterministic unit-sphere sampling and a Nelder–Mead polish in
//! hyperspherical angles.

use std::f64::consts::PI;

use crate::grid::{Point, MAX_DIM};

/// Unit vector with hyperspherical angles `theta` (length `d - 1`).
pub(crate) fn from_angles(theta: &[f64]) -> Point {
    let d = theta.len() + 1;
    let mut k = [0.0; MAX_DIM];
    let mut s = 1.0;
    for a in 0..d - 1 {
        k[a] = s * theta[a].cos();
        s *= theta[a].sin();
    }
    k[d - 1] = s;
    k
}

pub(crate) fn to_angles(k: &[f64]) -> Vec<f64> {
    let d = k.len();
    let mut theta = vec![0.0; d - 1];
    for a in 0..d - 1 {
        let tail = k[a + 1..].iter().map(|v| v * v).sum::<f64>().sqrt();
        theta[a] = tail.atan2(k[a]);
    }
    if d >= 2 && k[d - 1] < 0.0 {
        theta[d - 2] = -theta[d - 2];
    }
    theta
}

/// `count` quasi-uniform directions on `S^(d-1)`, modulo `k ~ -k`.
///
/// d = 2 uses equally spaced half-circle angles, d = 3 a Fibonacci lattice,
/// d = 4 an R3 Kronecker sequence pushed through Hopf coordinates.
pub(crate) fn lattice(d: usize, count: usize) -> Vec<Point> {
    let mut out = Vec::with_capacity(count);
    match d {
        1 => {
            let mut k = [0.0; MAX_DIM];
            k[0] = 1.0;
            out.push(k);
        }
        2 => {
            for j in 0..count {
                let t = PI * j as f64 / count as f64;
                out.push([t.cos(), t.sin(), 0.0, 0.0]);
            }
        }
        3 => {
            let golden = PI * (3.0 - 5f64.sqrt());
            for j in 0..count {
                let z = 1.0 - (2 * j + 1) as f64 / count as f64;
                let r = (1.0 - z * z).max(0.0).sqrt();
                let phi = golden * j as f64;
                out.push([r * phi.cos(), r * phi.sin(), z, 0.0]);
            }
        }
        _ => {
            // Plastic-number generalization of the golden ratio for three
            // dimensions.
            let g: f64 = 1.220_744_084_605_759_5;
            let alpha = [1.0 / g, 1.0 / (g * g), 1.0 / (g * g * g)];
            for j in 0..count {
                let q: Vec<f64> = alpha
                    .iter()
                    .map(|a| (0.5 + a * (j + 1) as f64).fract())
                    .collect();
                let (r1, r2) = (q[0].sqrt(), (1.0 - q[0]).sqrt());
                let (a, b) = (2.0 * PI * q[1], 2.0 * PI * q[2]);
                out.push([r1 * a.cos(), r1 * a.sin(), r2 * b.cos(), r2 * b.sin()]);
            }
        }
    }
    out
}

/// Minimizes `f` from `start` with a standard Nelder–Mead simplex.
pub(crate) fn nelder_mead(
    f: impl Fn(&[f64]) -> f64,
    start: &[f64],
    step: f64,
    max_evals: usize,
) -> (Vec<f64>, f64) {
    let n = start.len();
    let mut simplex: Vec<Vec<f64>> = vec![start.to_vec()];
    for i in 0..n {
        let mut p = start.to_vec();
        p[i] += step;
        simplex.push(p);
    }
    let mut values: Vec<f64> = simplex.iter().map(|p| f(p)).collect();
    let mut evals = n + 1;
    while evals < max_evals {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();
        if (values[n] - values[0]).abs() <= 1e-15 * (1.0 + values[0].abs()) {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|c| simplex[..n].iter().map(|p| p[c]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n])
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };
        let reflected = along(-1.0);
        let fr = f(&reflected);
        evals += 1;
        if fr < values[0] {
            let expanded = along(-2.0);
            let fe = f(&expanded);
            evals += 1;
            if fe < fr {
                simplex[n] = expanded;
                values[n] = fe;
            } else {
                simplex[n] = reflected;
                values[n] = fr;
            }
        } else if fr < values[n - 1] {
            simplex[n] = reflected;
            values[n] = fr;
        } else {
            let contracted = if fr < values[n] { along(-0.5) } else { along(0.5) };
            let fc = f(&contracted);
            evals += 1;
            if fc < values[n].min(fr) {
                simplex[n] = contracted;
                values[n] = fc;
            } else {
                for i in 1..=n {
                    let shrunk: Vec<f64> = simplex[0]
                        .iter()
                        .zip(&simplex[i])
                        .map(|(b, p)| b + 0.5 * (p - b))
                        .collect();
                    values[i] = f(&shrunk);
                    simplex[i] = shrunk;
                }
                evals += n;
            }
        }
    }
    let best = (0..=n).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap_or(0);
    (simplex[best].clone(), values[best])
}

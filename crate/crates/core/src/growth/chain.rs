//! Chains of cubes from the unit cube at 0 to the unit cube at `x`, with
//! neighbouring sides differing by at most a factor 2.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::MAX_DIM;
use crate::quotient::HomogeneousClass;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cube {
    pub center: Vec<f64>,
    pub side: f64,
}

/// Cubes along the segment `0 → x`, edges aligned with an orthonormal frame
/// whose first vector is `x/|x|`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CubeChain {
    pub cubes: Vec<Cube>,
    pub target: Vec<f64>,
    pub frame: Vec<Vec<f64>>,
}

impl CubeChain {
    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    /// Largest ratio of adjacent sidelengths (≥ 1).
    pub fn max_side_ratio(&self) -> f64 {
        self.cubes
            .windows(2)
            .map(|w| (w[0].side / w[1].side).max(w[1].side / w[0].side))
            .fold(1.0, f64::max)
    }

    /// Whether `y` lies in cube `j` (open in every frame direction).
    pub fn contains(&self, j: usize, y: &[f64]) -> bool {
        let cube = &self.cubes[j];
        self.frame.iter().all(|e| {
            let t: f64 = e.iter().zip(y).zip(&cube.center).map(|((e, y), c)| e * (y - c)).sum();
            t.abs() < 0.5 * cube.side
        })
    }
}

/// Orthonormal frame with first vector `e1`, completed by Gram–Schmidt on
/// the coordinate axes.
fn frame(e1: &[f64]) -> Vec<Vec<f64>> {
    let d = e1.len();
    let mut out = vec![e1.to_vec()];
    for axis in 0..d {
        if out.len() == d {
            break;
        }
        let mut v = vec![0.0; d];
        v[axis] = 1.0;
        for e in &out {
            let dot: f64 = e.iter().zip(&v).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(e).for_each(|(x, e)| *x -= dot * e);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            out.push(v.iter().map(|x| x / norm).collect());
        }
    }
    out
}

/// Sides of the cubes strictly between the two unit cubes, for a gap `gap`
/// between their facing sides.
fn filler_sides(gap: f64) -> Vec<f64> {
    if gap < 0.5 {
        return Vec::new();
    }
    if gap < 1.0 {
        return vec![gap];
    }
    // Largest k with 1 + 2 + … + 2^k + … + 2 + 1 = 3·2^k − 2 ≤ gap.
    let mut k = 0u32;
    while 3.0 * 2f64.powi(k as i32 + 1) - 2.0 <= gap {
        k += 1;
    }
    let peak = 2f64.powi(k as i32);
    let base = 3.0 * peak - 2.0;
    let extra = ((gap - base) / peak).floor() as usize;
    let mut sides: Vec<f64> = (0..k).map(|i| 2f64.powi(i as i32)).collect();
    sides.extend(std::iter::repeat(peak).take(1 + extra));
    sides.extend((0..k).rev().map(|i| 2f64.powi(i as i32)));
    let total: f64 = sides.iter().sum();
    let scale = gap / total;
    sides.iter().map(|s| s * scale).collect()
}

/// Doubling-then-halving chain from the unit cube at 0 to the unit cube at
/// `x`. For `|x| < 1.5` the two unit cubes are joined directly.
pub fn build_cube_chain(x: &[f64]) -> Result<CubeChain> {
    let d = x.len();
    if d == 0 || d > MAX_DIM {
        return Err(Error::WrongDimension {
            expected: MAX_DIM,
            got: d,
        });
    }
    let dist = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(dist > 0.0) || !dist.is_finite() {
        return Err(Error::DegenerateInterval { a: 0.0, b: dist });
    }
    let e1: Vec<f64> = x.iter().map(|v| v / dist).collect();
    let at = |t: f64| e1.iter().map(|e| e * t).collect::<Vec<f64>>();
    let mut cubes = vec![Cube {
        center: vec![0.0; d],
        side: 1.0,
    }];
    let mut front = 0.5;
    for side in filler_sides(dist - 1.0) {
        cubes.push(Cube {
            center: at(front + 0.5 * side),
            side,
        });
        front += side;
    }
    cubes.push(Cube {
        center: x.to_vec(),
        side: 1.0,
    });
    Ok(CubeChain {
        cubes,
        target: x.to_vec(),
        frame: frame(&e1),
    })
}

/// Cube means of a class along a chain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainOscillation {
    /// `|(u)_{Q_x} − (u)_{Q_0}|`.
    pub total: f64,
    /// `|(u)_{Q_j} − (u)_{Q_{j+1}}|` for each adjacent pair.
    pub steps: Vec<f64>,
    /// `max(steps) / ‖∂u‖_{L^p}` (0 for the zero class).
    pub step_constant: f64,
    pub seminorm: f64,
}

/// Means over sharp cube masks; the difference of vector means is measured
/// in the Euclidean norm.
pub fn chain_oscillation(class: &HomogeneousClass, chain: &CubeChain) -> Result<ChainOscillation> {
    let grid = *class.grid();
    let d = grid.d();
    if chain.target.len() != d {
        return Err(Error::WrongDimension {
            expected: d,
            got: chain.target.len(),
        });
    }
    let (l, h, n) = (grid.half_width(), grid.spacing(), grid.n());
    let rep = class.rep();
    let mut means: Vec<Vec<f64>> = Vec::with_capacity(chain.len());
    for (index, cube) in chain.cubes.iter().enumerate() {
        if cube.side < 4.0 * h {
            return Err(Error::CubeUnresolved {
                index,
                side: cube.side,
                spacing: h,
            });
        }
        // Axis-aligned bounding box of the rotated cube.
        let mut lo = [0usize; MAX_DIM];
        let mut hi = [0usize; MAX_DIM];
        for b in 0..d {
            let reach = 0.5 * cube.side * chain.frame.iter().map(|e| e[b].abs()).sum::<f64>();
            let (a, z) = (cube.center[b] - reach, cube.center[b] + reach);
            if a < -l || z >= l - h {
                return Err(Error::CubeOutsideBox {
                    index,
                    center: cube.center.clone(),
                    side: cube.side,
                });
            }
            lo[b] = ((a + l) / h).floor() as usize;
            hi[b] = (((z + l) / h).ceil() as usize).min(n - 1);
        }
        let mut sums = vec![0.0; grid.m()];
        let mut count = 0usize;
        let mut idx = lo;
        let len = grid.points();
        'scan: loop {
            let y: Vec<f64> = (0..d).map(|b| grid.coordinate(idx[b])).collect();
            if chain.contains(index, &y) {
                let flat = grid.flat_index(&idx);
                for (c, s) in sums.iter_mut().enumerate() {
                    *s += rep.values()[c * len + flat];
                }
                count += 1;
            }
            for b in (0..d).rev() {
                if idx[b] < hi[b] {
                    idx[b] += 1;
                    continue 'scan;
                }
                idx[b] = lo[b];
            }
            break;
        }
        if count == 0 {
            return Err(Error::CubeUnresolved {
                index,
                side: cube.side,
                spacing: h,
            });
        }
        means.push(sums.iter().map(|s| s / count as f64).collect());
    }
    let dist = |a: &[f64], b: &[f64]| {
        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
    };
    let steps: Vec<f64> = means.windows(2).map(|w| dist(&w[0], &w[1])).collect();
    let total = dist(&means[0], &means[means.len() - 1]);
    let seminorm = class.seminorm();
    let max_step = steps.iter().copied().fold(0.0, f64::max);
    Ok(ChainOscillation {
        total,
        steps,
        step_constant: if seminorm > 0.0 { max_step / seminorm } else { 0.0 },
        seminorm,
    })
}

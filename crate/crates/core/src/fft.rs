//! Unitary d-dimensional FFT over row-major `N^d` buffers.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

type Plans = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

fn plans(n: usize) -> Plans {
    static CACHE: OnceLock<Mutex<HashMap<usize, Plans>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
        })
        .clone()
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum Direction {
    Forward,
    Inverse,
}

/// In-place unitary transform of one component (length `n^d`).
pub(crate) fn transform(data: &mut [Complex64], n: usize, d: usize, dir: Direction) {
    debug_assert_eq!(data.len(), n.pow(d as u32));
    let (fwd, inv) = plans(n);
    let fft = match dir {
        Direction::Forward => fwd,
        Direction::Inverse => inv,
    };
    for axis in 0..d {
        let stride = n.pow((d - 1 - axis) as u32);
        let block = stride * n;
        if stride == 1 {
            let rows = (4096 / n).max(1);
            data.par_chunks_mut((rows * n).min(data.len()))
                .for_each(|chunk| {
                    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
                    fft.process_with_scratch(chunk, &mut scratch);
                });
            continue;
        }
        data.par_chunks_mut(block).for_each(|blk| {
            const TILE: usize = 16;
            let mut lines = vec![Complex64::default(); TILE * n];
            let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
            for start in (0..stride).step_by(TILE) {
                let width = TILE.min(stride - start);
                let buf = &mut lines[..width * n];
                for j in 0..n {
                    let row = &blk[start + j * stride..start + j * stride + width];
                    for (t, v) in row.iter().enumerate() {
                        buf[t * n + j] = *v;
                    }
                }
                fft.process_with_scratch(buf, &mut scratch);
                for j in 0..n {
                    let row = &mut blk[start + j * stride..start + j * stride + width];
                    for (t, v) in row.iter_mut().enumerate() {
                        *v = buf[t * n + j];
                    }
                }
            }
        });
    }
    let scale = (n.pow(d as u32) as f64).sqrt().recip();
    data.iter_mut().for_each(|v| *v *= scale);
}

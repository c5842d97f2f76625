//! Error-free floating-point summation (Shewchuk partials with a correctly
//! rounded final sum).

/// Running sum kept as non-overlapping partials, exact for any finite input.
#[derive(Debug, Clone, Default)]
pub(crate) struct ExactSum {
    partials: Vec<f64>,
}

impl ExactSum {
    pub(crate) fn new() -> Self {
        Self::default()
    }

    pub(crate) fn add(&mut self, mut x: f64) {
        let mut kept = 0;
        for i in 0..self.partials.len() {
            let mut y = self.partials[i];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                self.partials[kept] = lo;
                kept += 1;
            }
            x = hi;
        }
        self.partials.truncate(kept);
        self.partials.push(x);
    }

    pub(crate) fn partials(&self) -> &[f64] {
        &self.partials
    }

    /// The exact sum rounded once to nearest (ties to even).
    pub(crate) fn value(&self) -> f64 {
        let p = &self.partials;
        let Some(&last) = p.last() else {
            return 0.0;
        };
        let mut hi = last;
        let mut lo = 0.0;
        let mut i = p.len() - 1;
        while i > 0 {
            i -= 1;
            let x = hi;
            let y = p[i];
            hi = x + y;
            let yr = hi - x;
            lo = y - yr;
            if lo != 0.0 {
                break;
            }
        }
        // Half-way case: the remaining partials decide the rounding direction.
        if i > 0 && ((lo < 0.0 && p[i - 1] < 0.0) || (lo > 0.0 && p[i - 1] > 0.0)) {
            let y = lo * 2.0;
            let x = hi + y;
            let yr = x - hi;
            if y == yr {
                hi = x;
            }
        }
        hi
    }
}

/// Correctly rounded `x - Σ partials`.
pub(crate) fn difference(x: f64, partials: &[f64]) -> f64 {
    let mut acc = ExactSum::new();
    acc.add(x);
    for &p in partials {
        acc.add(-p);
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cancels_exactly() {
        let mut s = ExactSum::new();
        for v in [1e100, 1.0, -1e100, 1e-100] {
            s.add(v);
        }
        assert_eq!(s.value(), 1.0 + 1e-100);
        let mut t = ExactSum::new();
        for _ in 0..10 {
            t.add(0.1);
        }
        assert_eq!(t.value(), 1.0);
    }

    #[test]
    fn difference_is_rounded_once() {
        let mut s = ExactSum::new();
        s.add(1.0);
        s.add(1e-20);
        assert_eq!(difference(1.0, s.partials()), -1e-20);
    }
}

//! Legendre–Hadamard constants against brute force, homogeneity, and the
//! perturbation certificate against measured coercivity.

use beppo::ellipticity::{acoustic_tensor, lh_constant, perturbation_coercivity, Tensor4};
use beppo::quotient::HomogeneousClass;
use beppo::solver::bilinear;
use beppo::testfields;
use beppo::Grid;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-3 && norm <= 1.0 {
            return v.iter().map(|x| x / norm).collect();
        }
    }
}

/// `min (v⊗k) : C : (v⊗k)` over random unit pairs.
fn brute_force(c: &Tensor4, samples: usize, seed: u64) -> f64 {
    let (m, d) = (c.m(), c.d());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw = c.raw();
    (0..samples)
        .map(|_| {
            let (k, v) = (unit(&mut rng, d), unit(&mut rng, m));
            let mut s = 0.0;
            for i in 0..m {
                for a in 0..d {
                    for j in 0..m {
                        for b in 0..d {
                            s += raw[c.index(i, a, j, b)] * v[i] * k[a] * v[j] * k[b];
                        }
                    }
                }
            }
            s
        })
        .fold(f64::INFINITY, f64::min)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn isotropic_lh_matches_brute_force(lambda in -1.8f64..3.0, mu in 0.2f64..2.0, seed in any::<u64>()) {
        let c = Tensor4::isotropic(2, lambda, mu);
        let lh = lh_constant(&c, 64).unwrap();
        let brute = brute_force(&c, 20_000, seed);
        prop_assert!(lh <= brute + 1e-9);
        prop_assert!(brute - lh < 1e-2 * (lambda.abs() + mu), "{lh} vs {brute}");
        prop_assert!((lh - mu.min(lambda + 2.0 * mu)).abs() < 1e-6);
    }

    #[test]
    fn lh_is_positively_homogeneous(lambda in -1.5f64..3.0, mu in 0.2f64..2.0, s in 0.1f64..10.0) {
        let c = Tensor4::isotropic(3, lambda, mu);
        let a = lh_constant(&c, 64).unwrap();
        let b = lh_constant(&c.scaled(s), 64).unwrap();
        prop_assert!((b - s * a).abs() < 1e-6 * s.max(1.0));
    }

    #[test]
    fn acoustic_tensor_quadratic(lambda in -2.0f64..2.0, mu in -2.0f64..2.0, k in prop::array::uniform3(-4.0f64..4.0)) {
        let c = Tensor4::isotropic(3, lambda, mu);
        let g1 = acoustic_tensor(&c, &k).unwrap();
        let g2 = acoustic_tensor(&c, &k.map(|x| 2.0 * x)).unwrap();
        for (a, b) in g1.entries().iter().zip(g2.entries()) {
            prop_assert_eq!(4.0 * a, *b);
        }
    }
}

#[test]
fn perturbation_certificate_bounds_rayleigh_quotient() {
    let g = Grid::new(2, 1, 8.0, 32).unwrap();
    for amplitude in [0.1, 0.3, 0.6] {
        let c = Tensor4::perturbed_laplacian(g, 1, amplitude);
        let bound = perturbation_coercivity(&c.mean(), &c).unwrap();
        assert!(bound.certifies());
        for seed in 0..100u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let u = testfields::band_limited(g, 0.5 * g.max_wavenumber(), &mut rng).unwrap();
            let class = HomogeneousClass::canonicalize(&u, 2.0).unwrap();
            let q = bilinear(&c, &class, &class).unwrap() / class.seminorm().powi(2);
            assert!(q >= bound.bound - 1e-8, "amplitude {amplitude}: {q} < {}", bound.bound);
        }
    }
}

#[test]
fn laplacian_lh_matches_brute_force() {
    let c = Tensor4::laplacian(2, 3);
    let lh = lh_constant(&c, 64).unwrap();
    assert!((lh - 1.0).abs() < 1e-12);
    assert!((brute_force(&c, 100_000, 11) - lh).abs() < 1e-4);
}

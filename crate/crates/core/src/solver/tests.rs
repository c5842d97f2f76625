use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::ellipticity::Tensor4;
use crate::testfields;

fn class(f: &Field) -> HomogeneousClass {
    HomogeneousClass::canonicalize(f, 2.0).unwrap()
}

fn rel_seminorm_error(a: &HomogeneousClass, b: &HomogeneousClass) -> f64 {
    let diff = class(&a.rep().sub(b.rep()).unwrap());
    diff.seminorm() / b.seminorm()
}

fn random_class(grid: Grid, seed: u64) -> HomogeneousClass {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    class(&testfields::band_limited(grid, 0.25 * grid.max_wavenumber(), &mut rng).unwrap())
}

#[test]
fn bilinear_laplacian_is_seminorm_squared() {
    let g = Grid::new(2, 1, 8.0, 32).unwrap();
    let u = random_class(g, 1);
    let a = bilinear(&Tensor4::laplacian(1, 2), &u, &u).unwrap();
    assert!((a - u.seminorm().powi(2)).abs() <= 1e-12 * a);
}

#[test]
fn bilinear_symmetric_tensor_is_symmetric() {
    let g = Grid::new(2, 2, 8.0, 32).unwrap();
    let c = Tensor4::isotropic(2, 0.7, 1.3);
    let (u, v) = (random_class(g, 2), random_class(g, 3));
    let (a, b) = (bilinear(&c, &u, &v).unwrap(), bilinear(&c, &v, &u).unwrap());
    assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
}

#[test]
fn bilinear_single_mode() {
    for d in [1, 2] {
        let l = 4.0;
        let g = Grid::new(d, 1, l, 32).unwrap();
        let u = class(&testfields::sine_mode(g).unwrap());
        let a = bilinear(&Tensor4::laplacian(1, d), &u, &u).unwrap();
        let expected = (PI / l).powi(2) * (2.0 * l).powi(d as i32) / 2.0;
        assert!((a - expected).abs() < 1e-10 * expected, "{a} vs {expected}");
    }
}

#[test]
fn bilinear_bounded_by_c1() {
    let g = Grid::new(2, 1, 8.0, 32).unwrap();
    let c = Tensor4::perturbed_laplacian(g, 1, 0.4);
    let c1 = c.sup_norm();
    for seed in 0..10 {
        let (u, v) = (random_class(g, 10 + seed), random_class(g, 50 + seed));
        let a = bilinear(&c, &u, &v).unwrap();
        assert!(a.abs() <= c1 * u.seminorm() * v.seminorm() * (1.0 + 1e-12));
    }
}

/// Manufactured pair with the quadrature-level mean of `f` projected out.
fn manufactured(grid: Grid, c: &Tensor4, amplitudes: &[f64], centers: &[Vec<f64>]) -> (Field, Field) {
    let (u, f) = testfields::manufactured_rhs(grid, c.raw(), amplitudes, centers).unwrap();
    let mean: Vec<f64> = f.means().iter().map(|m| -m).collect();
    (u, f.shifted(&mean))
}

#[test]
fn constant_laplacian_manufactured() {
    let g = Grid::new(2, 1, 10.0, 128).unwrap();
    let c = Tensor4::laplacian(1, 2);
    let (u, f) = manufactured(g, &c, &[1.0], &[vec![0.3, -0.2]]);
    let report = solve_constant(&c, &FunctionalSpec::density(f).unwrap()).unwrap();
    let err = rel_seminorm_error(&report.solution, &class(&u));
    assert!(err < 1e-10, "{err}");
    assert!(report.residual < 1e-12);
    assert_eq!(report.method, Method::Direct);
}

#[test]
fn constant_elasticity_manufactured() {
    let g = Grid::new(2, 2, 10.0, 128).unwrap();
    let c = Tensor4::isotropic(2, 1.0, 1.0);
    let (u, f) = manufactured(g, &c, &[1.0, -0.5], &[vec![0.5, 0.0], vec![-0.4, 0.7]]);
    let report = solve_constant(&c, &FunctionalSpec::density(f).unwrap()).unwrap();
    let err = rel_seminorm_error(&report.solution, &class(&u));
    assert!(err < 1e-9, "{err}");
}

#[test]
fn constant_solve_spectral_convergence() {
    let c = Tensor4::laplacian(1, 2);
    let err = |n: usize| {
        let g = Grid::new(2, 1, 10.0, n).unwrap();
        let (u, f) = manufactured(g, &c, &[1.0], &[vec![0.0, 0.0]]);
        let report = solve_constant(&c, &FunctionalSpec::density(f).unwrap()).unwrap();
        rel_seminorm_error(&report.solution, &class(&u))
    };
    let (coarse, fine) = (err(32), err(64));
    assert!(fine <= 1e-4 * coarse, "{coarse} -> {fine}");
}

#[test]
fn zero_rhs_gives_zero_class() {
    let g = Grid::new(2, 1, 8.0, 32).unwrap();
    let rhs = FunctionalSpec::density(Field::zeros(g)).unwrap();
    let report = solve_constant(&Tensor4::laplacian(1, 2), &rhs).unwrap();
    assert_eq!(report.solution.seminorm(), 0.0);
    assert_eq!(report.energy, 0.0);
    let var = solve_variable(&Tensor4::perturbed_laplacian(g, 1, 0.3), &rhs, 1e-10).unwrap();
    assert_eq!(var.iterations, 0);
    assert_eq!(var.solution.seminorm(), 0.0);
}

#[test]
fn galerkin_identity_and_energy() {
    let g = Grid::new(2, 2, 10.0, 64).unwrap();
    let c = Tensor4::isotropic(2, 1.0, 1.0);
    let (_, f) = manufactured(g, &c, &[1.0, 0.3], &[vec![0.0, 0.0], vec![1.0, 0.0]]);
    let rhs = FunctionalSpec::density(f).unwrap();
    let report = solve_constant(&c, &rhs).unwrap();
    let u = &report.solution;
    let l_u = functionals::apply(&rhs, u).unwrap();
    for seed in 0..20 {
        let v = random_class(g, 100 + seed);
        let a = bilinear(&c, u, &v).unwrap();
        let l = functionals::apply(&rhs, &v).unwrap();
        let scale = u.seminorm() * v.seminorm() * c.sup_norm();
        assert!((a - l).abs() <= 1e-10 * scale, "{a} vs {l}");
    }
    assert!((report.energy + 0.5 * l_u).abs() <= 1e-10 * l_u.abs());
    assert_eq!(energy(&c, &rhs, &HomogeneousClass::zero(g, 2.0).unwrap()).unwrap(), 0.0);
}

#[test]
fn flux_rhs_matches_density() {
    let g = Grid::new(2, 1, 10.0, 64).unwrap();
    let c = Tensor4::laplacian(1, 2);
    let f = testfields::gaussian_gradient(g, 1, 1.5).unwrap();
    let (flux, _) = functionals::riesz_flux(&f).unwrap();
    let a = solve_constant(&c, &FunctionalSpec::density(f).unwrap()).unwrap();
    let b = solve_constant(&c, &FunctionalSpec::flux(flux, 1).unwrap()).unwrap();
    assert!(rel_seminorm_error(&b.solution, &a.solution) < 1e-12);
}

#[test]
fn constant_tensor_as_varying_converges_in_one_iteration() {
    let g = Grid::new(2, 1, 10.0, 64).unwrap();
    let c = Tensor4::perturbed_laplacian(g, 1, 0.0);
    let f = testfields::gaussian_gradient(g, 0, 1.5).unwrap();
    let report = solve_variable(&c, &FunctionalSpec::density(f).unwrap(), 1e-10).unwrap();
    assert_eq!(report.iterations, 1);
    assert_eq!(report.method, Method::Cg);
}

fn sine_problem(n: usize) -> SolveReport {
    let g = Grid::new(2, 1, 16.0, n).unwrap();
    let c = Tensor4::perturbed_laplacian(g, 1, 0.3);
    let f = testfields::gaussian_dipole(g, 4.0, 1.5).unwrap();
    solve_variable(&c, &FunctionalSpec::density(f).unwrap(), 1e-10).unwrap()
}

#[test]
fn variable_iterations_bounded_and_mesh_independent() {
    let kappa: f64 = 1.3 / 0.7;
    let bound = (0.5 * kappa.sqrt() * (2e10f64).ln()).ceil() as usize + 2;
    let counts: Vec<usize> = [64, 256].iter().map(|&n| sine_problem(n).iterations).collect();
    for &k in &counts {
        assert!(k <= bound, "{k} > {bound}");
    }
    assert!(counts[0].abs_diff(counts[1]) <= 2, "{counts:?}");
}

#[test]
fn variable_solve_residual_energy_and_galerkin() {
    let report = sine_problem(64);
    assert!(report.residual <= 1e-10);
    assert!((report.constants.cond_estimate - 13.0 / 7.0).abs() < 1e-9);
    assert!((report.constants.c0 - 0.7).abs() < 1e-6);
    for w in report.energies.windows(2) {
        assert!(w[1] <= w[0], "{} -> {}", w[0], w[1]);
    }
    let last = *report.energies.last().unwrap();
    assert!((last - report.energy).abs() <= 1e-10 * report.energy.abs());
    assert!(report.energy_defect < 1e-12, "{}", report.energy_defect);

    let g = *report.solution.grid();
    let c = Tensor4::perturbed_laplacian(g, 1, 0.3);
    let rhs = FunctionalSpec::density(testfields::gaussian_dipole(g, 4.0, 1.5).unwrap()).unwrap();
    let u = &report.solution;
    for seed in 0..20 {
        let v = random_class(g, 200 + seed);
        let a = bilinear(&c, u, &v).unwrap();
        let l = functionals::apply(&rhs, &v).unwrap();
        assert!((a - l).abs() <= 1e-9 * u.seminorm() * v.seminorm() * c.sup_norm());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let v = random_class(g, rng.gen());
        let scale = 0.1 * u.seminorm() / v.seminorm() * rng.gen_range(0.01..1.0);
        let w = class(&u.rep().add(&v.rep().scale(scale)).unwrap());
        assert!(energy(&c, &rhs, &w).unwrap() >= report.energy);
    }
}

#[test]
fn initial_guess_shift_is_irrelevant() {
    let g = Grid::new(2, 1, 16.0, 64).unwrap();
    let c = Tensor4::perturbed_laplacian(g, 1, 0.3);
    let rhs = FunctionalSpec::density(testfields::gaussian_dipole(g, 4.0, 1.5).unwrap()).unwrap();
    let guess = testfields::gaussian(g, &[1.0, 1.0], 2.0, 0.5).unwrap();
    let a = solve_variable_from(&c, &rhs, 1e-12, Some(&guess)).unwrap();
    let b = solve_variable_from(&c, &rhs, 1e-12, Some(&guess.shifted(&[3.0]))).unwrap();
    assert!(rel_seminorm_error(&a.solution, &b.solution) < 1e-10);
}

#[test]
fn nonsymmetric_tensor_uses_normal_form() {
    let g = Grid::new(2, 1, 10.0, 64).unwrap();
    let l = g.half_width();
    let c = Tensor4::from_fn(g, 1, |x, out| {
        let s = 0.2 * (PI * x[0] / l).sin();
        out.copy_from_slice(&[1.0 + s, 0.3 * s, -0.1 * s, 1.0]);
    })
    .unwrap();
    assert!(!c.is_major_symmetric(1e-12));
    let rhs = FunctionalSpec::density(testfields::gaussian_dipole(g, 3.0, 1.5).unwrap()).unwrap();
    let report = solve_variable(&c, &rhs, 1e-10).unwrap();
    assert_eq!(report.method, Method::MinresNormal);
    assert!(report.residual <= 1e-10);
    let u = &report.solution;
    for seed in 0..5 {
        let v = random_class(g, 300 + seed);
        let a = bilinear(&c, u, &v).unwrap();
        let l = functionals::apply(&rhs, &v).unwrap();
        assert!((a - l).abs() <= 1e-9 * u.seminorm() * v.seminorm() * c.sup_norm());
    }
}

#[test]
fn refuses_uncertified_and_non_elliptic() {
    let g = Grid::new(2, 1, 8.0, 32).unwrap();
    let rhs = FunctionalSpec::density(testfields::gaussian_dipole(g, 3.0, 1.0).unwrap()).unwrap();
    let wild = Tensor4::perturbed_laplacian(g, 1, 1.5);
    assert!(matches!(solve_variable(&wild, &rhs, 1e-10), Err(Error::NotCertified { .. })));
    let neg = Tensor4::laplacian(1, 2).scaled(-1.0);
    assert!(matches!(solve_constant(&neg, &rhs), Err(Error::LegendreHadamard { .. })));
    let plain = FunctionalSpec::density(testfields::gaussian(g, &[0.0, 0.0], 1.0, 1.0).unwrap()).unwrap();
    assert!(matches!(
        solve_constant(&Tensor4::laplacian(1, 2), &plain),
        Err(Error::NonzeroMean { .. })
    ));
    assert!(matches!(
        WeakProblem::new(Tensor4::laplacian(1, 2), plain),
        Err(Error::NonzeroMean { .. })
    ));
}

#[test]
fn coercivity_witness() {
    let g = Grid::new(2, 1, 8.0, 32).unwrap();
    let c = Tensor4::perturbed_laplacian(g, 1, 0.3);
    let c0 = certify(&c).unwrap().c0;
    for seed in 0..20 {
        let u = random_class(g, 400 + seed);
        assert!(bilinear(&c, &u, &u).unwrap() >= c0 * u.seminorm().powi(2) - 1e-8);
    }
}

#[test]
fn regularity_laplacian_identity() {
    let g = Grid::new(2, 1, 10.0, 128).unwrap();
    let c = Tensor4::laplacian(1, 2);
    let (_, f) = manufactured(g, &c, &[1.0], &[vec![0.0, 0.0]]);
    let u = solve_constant(&c, &FunctionalSpec::density(f.clone()).unwrap()).unwrap().solution;
    let report = regularity_check(&c, &f, &u).unwrap();
    assert!(report.h2_bound_ok, "{:?}", report.second_total);
    assert!(report.h3_bound_ok && report.h3_derived_ok);
    let norms = report.measured_norms;
    assert!((norms.hess_u - norms.f).abs() <= 1e-10 * norms.f);

    let zero = regularity_check(&c, &Field::zeros(g), &HomogeneousClass::zero(g, 2.0).unwrap()).unwrap();
    assert_eq!(zero.measured_norms.hess_u, 0.0);
    assert_eq!(zero.measured_norms.third_u, 0.0);
    assert_eq!(zero.measured_norms.f, 0.0);
}

#[test]
fn regularity_perturbed_tensor() {
    let g = Grid::new(2, 1, 10.0, 128).unwrap();
    let c = Tensor4::perturbed_laplacian(g, 1, 0.2);
    let f = testfields::gaussian_dipole(g, 3.0, 1.5).unwrap();
    let report = solve_variable(&c, &FunctionalSpec::density(f.clone()).unwrap(), 1e-12).unwrap();
    let reg = regularity_check(&c, &f, &report.solution).unwrap();
    assert!(reg.h2_bound_ok && reg.h3_bound_ok && reg.h3_derived_ok, "{reg:?}");
    let norms = reg.measured_norms;
    assert!(norms.dc_sup > 0.0 && norms.dc_l2 > 0.0 && norms.d2c_sup > 0.0);
    assert!((norms.dc_sup - 0.2 * PI / 10.0).abs() < 1e-9);
    assert!(reg.second.iter().all(|c| c.margin > 0.0));
}

#[test]
fn regularity_rejects_unresolved_coefficients() {
    let g = Grid::new(2, 1, 8.0, 32).unwrap();
    let c = Tensor4::from_fn(g, 1, |x, out| {
        let s = if x[0] > 0.0 { 1.2 } else { 1.0 };
        out.copy_from_slice(&[s, 0.0, 0.0, s]);
    })
    .unwrap();
    let u = HomogeneousClass::zero(g, 2.0).unwrap();
    assert!(matches!(regularity_check(&c, &Field::zeros(g), &u), Err(Error::Unresolved { .. })));
}

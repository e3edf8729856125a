mod common;

use common::*;
use lindblad3q::linalg::expm;
use lindblad3q::model::{Baths, QuadraticLindbladSpec, Statistics};
use lindblad3q::oracle::*;
use lindblad3q::phasespace::{damped_kernel, DampedOscillatorParams};
use lindblad3q::thirdq_boson::*;
use lindblad3q::{CMat64, Complex64};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;

fn random_unitary(r: &mut impl Rng, n: usize) -> CMat64 {
    let a = random_matrix(r, n, n, 1.0);
    expm(&((&a - a.adjoint()) * c(0.5, 0.0)))
}

fn lyapunov_residual(tq: &ThirdQuantizedBoson<f64>, s: &CMat64) -> f64 {
    (&tq.h_eff * s - s * tq.h_eff.adjoint() + &tq.n * c(0.0, 1.0)).norm()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn steady_covariance_solves_lyapunov(seed in any::<u64>(), m in 1usize..=4) {
        let mut r = rng(seed);
        let tq = third_quantize(&random_boson_spec(&mut r, m, 1.0, 0.5)).unwrap();
        let s = solve_steady_covariance(&tq).unwrap();
        prop_assert!(lyapunov_residual(&tq, &s) < 1e-10);
        prop_assert!(lindblad3q::linalg::hermitian_eigenvalues(&s)[0] >= 1.0 - 1e-8);
    }

    #[test]
    fn covariance_evolution_is_a_semigroup(seed in any::<u64>(), t1 in 0.0f64..3.0, t2 in 0.0f64..3.0) {
        let mut r = rng(seed);
        let tq = third_quantize(&random_boson_spec(&mut r, 2, 1.0, 0.4)).unwrap();
        let s0 = CMat64::identity(2, 2) + random_hermitian(&mut r, 2, 0.2);
        let once = evolve_covariance(&tq, &s0, t1 + t2).unwrap();
        let twice = evolve_covariance(&tq, &evolve_covariance(&tq, &s0, t1).unwrap(), t2).unwrap();
        prop_assert!((once - twice).norm() < 1e-12);
    }

    #[test]
    fn unitary_bath_mixing_leaves_matrices_unchanged(seed in any::<u64>(), m in 1usize..=3) {
        let mut r = rng(seed);
        let b = m + 2;
        let l = random_matrix(&mut r, b, m, 0.6);
        let p = random_matrix(&mut r, b, m, 0.3);
        let v = random_unitary(&mut r, b);
        let h = random_hermitian(&mut r, m, 1.0);
        let spec = QuadraticLindbladSpec::new(Statistics::Boson, h.clone(), CMat64::zeros(m, m), Baths::Couplings { l: l.clone(), p: p.clone() }).unwrap();
        let mixed = QuadraticLindbladSpec::new(Statistics::Boson, h, CMat64::zeros(m, m), Baths::Couplings { l: &v * l, p: v.conjugate() * p }).unwrap();
        let (a, z) = (spec.dissipators().unwrap(), mixed.dissipators().unwrap());
        prop_assert!((a.l - z.l).norm() < 1e-12);
        prop_assert!((a.p - z.p).norm() < 1e-12);
        prop_assert!((a.c - z.c).norm() < 1e-12);
    }

    #[test]
    fn generic_kernel_matches_single_mode_closed_form(
        omega0 in -2.0f64..2.0, kappa in 0.05f64..2.0, nth in 0.0f64..2.0,
        er in -1.0f64..1.0, ei in -1.0f64..1.0, ar in -2.0f64..2.0, ai in -2.0f64..2.0, t in 0.0f64..4.0,
    ) {
        let p = DampedOscillatorParams::new(omega0, kappa, nth).unwrap();
        let tq = third_quantize(&QuadraticLindbladSpec::damped_oscillator(omega0, kappa, nth)).unwrap();
        let (eta, alpha) = (c(er, ei), c(ar, ai));
        let g = gaussian_kernel(&tq, &[eta], &[alpha], t).unwrap();
        prop_assert!((g - damped_kernel(&p, eta, alpha, t)).norm() < 1e-12 * g.norm().max(1.0));
    }
}

#[test]
fn kernel_exponent_is_a_quadratic_form() {
    let mut r = rng(7);
    let tq = third_quantize(&random_boson_spec(&mut r, 1, 1.0, 0.5)).unwrap();
    let t = 0.8;
    let monomials = |e: Complex64, a: Complex64| {
        vec![e * a, e * a.conj(), e.conj() * a, e.conj() * a.conj(), e * e, e.conj() * e.conj(), e * e.conj(), e, e.conj()]
    };
    let samples: Vec<(Complex64, Complex64)> = (0..20).map(|_| (random_complex(&mut r, 0.4), random_complex(&mut r, 0.6))).collect();
    let logk = |(e, a): (Complex64, Complex64)| gaussian_kernel(&tq, &[e], &[a], t).unwrap().ln();
    let design = DMatrix::from_fn(9, 9, |i, j| monomials(samples[i].0, samples[i].1)[j]);
    let rhs = nalgebra::DVector::from_iterator(9, samples[..9].iter().map(|&s| logk(s)));
    let coef = design.lu().solve(&rhs).unwrap();
    for &s in &samples[9..] {
        let fit: Complex64 = monomials(s.0, s.1).iter().zip(coef.iter()).map(|(m, k)| m * k).sum();
        assert!((fit - logk(s)).norm() < 1e-10);
    }
}

#[test]
fn two_mode_steady_state_matches_oracle() {
    let mut r = rng(21);
    let spec = random_boson_spec(&mut r, 2, 1.0, 0.15);
    let s = solve_steady_covariance(&third_quantize(&spec).unwrap()).unwrap();
    let nc = 11;
    let limits = OracleLimits { max_dim: nc * nc, ..OracleLimits::default() };
    let rho = build_boson_liouvillian(&spec, &[nc, nc], limits).unwrap().steady_state().unwrap();
    let edge = rho.edge_population(0, 2).max(rho.edge_population(1, 2));
    assert!(edge < 1e-10, "edge population {edge:e}");
    assert!((boson_covariance(&rho).unwrap() - s).norm() < 1e-8);
}

#[test]
fn two_mode_spectrum_matches_oracle() {
    let mut r = rng(22);
    let spec = random_boson_spec(&mut r, 2, 1.0, 0.15);
    let sd = spectral_data(&third_quantize(&spec).unwrap()).unwrap();
    let analytic: Vec<Complex64> = enumerate_spectrum(sd.e.as_slice(), 2)
        .unwrap()
        .iter()
        .filter(|e| e.index.mu.iter().sum::<u32>() == e.index.nu.iter().sum::<u32>())
        .map(|e| e.value)
        .collect();
    let nc = 8;
    let limits = OracleLimits { max_dim: nc * nc, ..OracleLimits::default() };
    let oracle = build_boson_liouvillian(&spec, &[nc, nc], limits).unwrap().sector_eigenvalues(0).unwrap();
    // every low-lying zero-charge eigenvalue appears in the oracle's zero-charge sector
    assert_eq!(analytic.len(), 5);
    assert!(nearest_distance(&analytic, &oracle) < 1e-7);
}

#[test]
fn unstable_and_symmetry_breaking_models_are_rejected() {
    let mut d = lindblad3q::model::DissipatorMatrices::zeros(1);
    d.l[(0, 0)] = c(0.1, 0.0);
    d.p[(0, 0)] = c(0.3, 0.0);
    let pump_heavy = QuadraticLindbladSpec::new(Statistics::Boson, CMat64::identity(1, 1), CMat64::zeros(1, 1), Baths::Direct(d)).unwrap();
    let tq = third_quantize(&pump_heavy).unwrap();
    assert!(matches!(solve_steady_covariance(&tq), Err(lindblad3q::Error::Unstable { .. })));
    let mut spec = QuadraticLindbladSpec::damped_oscillator(1.0, 0.5, 0.1);
    spec.k[(0, 0)] = c(0.1, 0.0);
    let tq = third_quantize(&spec).unwrap();
    assert!(!tq.is_u1_symmetric());
    assert!(matches!(solve_steady_covariance(&tq), Err(lindblad3q::Error::U1Breaking(_))));
}

#[test]
fn spectrum_is_sorted_and_complete() {
    let e = [c(1.0, -0.2), c(-0.4, -0.5)];
    let all = enumerate_spectrum(&e, 3).unwrap();
    assert_eq!(all.len(), 35);
    for w in all.windows(2) {
        assert!(w[0].value.im.abs() <= w[1].value.im.abs() + 1e-15);
    }
    assert_eq!(all[0].value, c(0.0, 0.0));
}

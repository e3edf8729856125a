mod common;

use common::*;
use lindblad3q::linalg::expm;
use lindblad3q::model::*;
use lindblad3q::oracle::*;
use lindblad3q::{CMat64, Error};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn json_round_trip_is_lossless(seed in any::<u64>(), m in 1usize..=4, fermion in any::<bool>()) {
        let mut r = rng(seed);
        let spec = if fermion { random_fermion_spec(&mut r, m) } else { random_boson_spec(&mut r, m, 1.0, 0.5) };
        let text = spec.to_json_string().unwrap();
        let back = QuadraticLindbladSpec::<f64>::from_json_str(&text).unwrap();
        prop_assert_eq!(back, spec);
    }
}

#[test]
fn validation_reports_every_violation() {
    let mut r = rng(1);
    let mut spec = random_boson_spec(&mut r, 2, 1.0, 0.5);
    assert!(validate_spec(&spec).passed());
    spec.h[(0, 1)] += c(0.5, 0.0);
    spec.k[(0, 1)] = c(0.3, 0.0);
    let report = validate_spec(&spec);
    let kinds: Vec<Invariant> = report.violations.iter().map(|v| v.invariant).collect();
    assert!(kinds.contains(&Invariant::HHermitian));
    assert!(kinds.contains(&Invariant::KSymmetric));

    let mut d = DissipatorMatrices::zeros(1);
    d.l[(0, 0)] = c(-0.2, 0.0);
    let bad = QuadraticLindbladSpec::new(Statistics::Fermion, CMat64::zeros(1, 1), CMat64::zeros(1, 1), Baths::Direct(d)).unwrap();
    assert!(validate_spec(&bad).violations.iter().any(|v| v.invariant == Invariant::LPositive));
}

#[test]
fn malformed_model_files_are_rejected() {
    assert!(matches!(QuadraticLindbladSpec::<f64>::from_json_str("{"), Err(Error::Parse(_))));
    let mixed = r#"{"statistics":"boson","modes":1,"H":[[[1,0]]],"l":[[[1,0]]],"p":[[[0,0]]],"L":[[[1,0]]],"P":[[[0,0]]]}"#;
    assert!(QuadraticLindbladSpec::<f64>::from_json_str(mixed).is_err());
    let ragged = r#"{"statistics":"boson","modes":2,"H":[[[1,0],[0,0]],[[0,0]]]}"#;
    assert!(QuadraticLindbladSpec::<f64>::from_json_str(ragged).is_err());
    let direct = r#"{"statistics":"fermion","modes":1,"H":[[[0.5,0]]],"L":[[[0.3,0]]],"P":[[[0.1,0]]]}"#;
    let parsed = QuadraticLindbladSpec::<f64>::from_json_str(direct).unwrap().dissipators().unwrap();
    let want = QuadraticLindbladSpec::<f64>::fermion_level(0.5, 0.4, 0.25).dissipators().unwrap();
    assert!((parsed.l - want.l).norm() < 1e-15 && (parsed.p - want.p).norm() < 1e-15);
}

#[test]
fn evolution_preserves_trace_and_hermiticity() {
    let mut r = rng(2);
    let spec = random_boson_spec(&mut r, 1, 1.0, 0.4);
    let l = build_boson_liouvillian(&spec, &[30], OracleLimits::default()).unwrap();
    assert!(l.trace_residual() < 1e-12);
    let rho = l.evolve_density(&coherent_state(c(1.0, -0.5), 30).unwrap(), 2.0).unwrap();
    assert!((rho.trace() - 1.0).norm() < 1e-12);
    assert!(rho.hermitian_residual() < 1e-12);
}

#[test]
fn squeezing_breaks_number_sectors_and_follows_linear_equations() {
    // H = ω a†a + (g/2)(a†a† + aa), loss κ: d⟨a⟩/dt = −i(ω⟨a⟩ + g⟨a†⟩) − (κ/2)⟨a⟩.
    let (omega, g, kappa) = (1.0, 0.3, 0.8);
    let mut spec = QuadraticLindbladSpec::damped_oscillator(omega, kappa, 0.0);
    spec.k[(0, 0)] = c(g, 0.0);
    let nc = 40;
    let l = build_boson_liouvillian(&spec, &[nc], OracleLimits::default()).unwrap();
    assert!(!l.is_u1());
    assert_eq!(l.sectors().len(), 1);
    let beta = c(0.8, 0.3);
    let a = boson_annihilator(&[nc], 0).unwrap();
    let gen = CMat64::from_row_slice(2, 2, &[c(-kappa / 2.0, -omega), c(0.0, -g), c(0.0, g), c(-kappa / 2.0, omega)]);
    for t in [0.5, 2.0] {
        let rho = l.evolve_density(&coherent_state(beta, nc).unwrap(), t).unwrap();
        let want = expm(&(&gen * c(t, 0.0))) * nalgebra::DVector::from_vec(vec![beta, beta.conj()]);
        assert!((rho.expect(&a) - want[0]).norm() < 1e-10);
    }
}

#[test]
fn oracle_refuses_oversized_problems() {
    let spec = QuadraticLindbladSpec::damped_oscillator(1.0, 0.5, 0.1);
    let r = build_boson_liouvillian(&spec, &[2000], OracleLimits::default());
    assert!(matches!(r, Err(Error::OracleCap { .. })));
    let mut r2 = rng(3);
    let big = random_fermion_spec(&mut r2, MAX_FERMION_MODES + 1);
    assert!(build_fermion_liouvillian(&big, OracleLimits::default()).is_err());
}

#[test]
fn ladder_superoperators_annihilate_the_vacua() {
    let nth = 0.4;
    let nc = 40;
    let rho = thermal_state(nth, nc).unwrap().rho;
    let cl = apply_superoperator_ladder(&rho, &[nc], Ladder::Cl, 0).unwrap();
    let q = apply_superoperator_ladder(&rho, &[nc], Ladder::Q, 0).unwrap();
    let vac = cl + q * c(2.0 * nth + 1.0, 0.0);
    assert!(vac.norm() < 1e-8);
    // the truncated identity fills the top levels, so the action is refused
    let id = CMat64::identity(nc, nc);
    assert!(matches!(apply_superoperator_ladder(&id, &[nc], Ladder::Q, 0), Err(Error::Headroom(_))));
}

#![allow(dead_code)]

use lindblad3q::model::{Baths, QuadraticLindbladSpec, Statistics};
use lindblad3q::thirdq_boson::{solve_steady_covariance, third_quantize};
use lindblad3q::thirdq_fermion::third_quantize_fermion;
use lindblad3q::{CMat64, Complex64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex(r: &mut impl Rng, scale: f64) -> Complex64 {
    c(r.gen_range(-1.0..1.0) * scale, r.gen_range(-1.0..1.0) * scale)
}

pub fn random_matrix(r: &mut impl Rng, rows: usize, cols: usize, scale: f64) -> CMat64 {
    CMat64::from_fn(rows, cols, |_, _| random_complex(r, scale))
}

pub fn random_hermitian(r: &mut impl Rng, m: usize, scale: f64) -> CMat64 {
    let a = random_matrix(r, m, m, scale);
    (&a + a.adjoint()) * c(0.5, 0.0)
}

/// Loss and pump couplings on disjoint baths, so the coherence matrix vanishes.
pub fn split_baths(r: &mut impl Rng, m: usize, loss: f64, pump: f64) -> Baths<f64> {
    let mut l = CMat64::zeros(2 * m, m);
    let mut p = CMat64::zeros(2 * m, m);
    l.view_mut((0, 0), (m, m)).copy_from(&random_matrix(r, m, m, loss));
    p.view_mut((m, 0), (m, m)).copy_from(&random_matrix(r, m, m, pump));
    Baths::Couplings { l, p }
}

/// Random particle-conserving bosonic spec whose steady state exists.
pub fn random_boson_spec(r: &mut impl Rng, m: usize, loss: f64, pump: f64) -> QuadraticLindbladSpec<f64> {
    loop {
        let h = random_hermitian(r, m, 1.0);
        let spec = QuadraticLindbladSpec::new(Statistics::Boson, h, CMat64::zeros(m, m), split_baths(r, m, loss, pump)).unwrap();
        let d = spec.dissipators().unwrap();
        let gap = lindblad3q::linalg::hermitian_eigenvalues(&(&d.l - &d.p))[0];
        if gap > 0.05 && solve_steady_covariance(&third_quantize(&spec).unwrap()).is_ok() {
            return spec;
        }
    }
}

/// Random particle-conserving fermionic spec.
pub fn random_fermion_spec(r: &mut impl Rng, m: usize) -> QuadraticLindbladSpec<f64> {
    loop {
        let h = random_hermitian(r, m, 1.0);
        let spec = QuadraticLindbladSpec::new(Statistics::Fermion, h, CMat64::zeros(m, m), split_baths(r, m, 0.8, 0.6)).unwrap();
        let d = spec.dissipators().unwrap();
        let gap = lindblad3q::linalg::hermitian_eigenvalues(&(&d.l + &d.p))[0];
        if gap > 0.05 && third_quantize_fermion(&spec).is_ok() {
            return spec;
        }
    }
}

/// Largest distance in a greedy nearest-neighbour pairing of two multisets.
pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut pool: Vec<Complex64> = b.to_vec();
    let mut worst: f64 = 0.0;
    for x in a {
        let (k, d) = pool
            .iter()
            .enumerate()
            .map(|(k, y)| (k, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        worst = worst.max(d);
        pool.swap_remove(k);
    }
    worst
}

/// For each value of `a`, the distance to the closest value of `b`.
pub fn nearest_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .map(|x| b.iter().map(|y| (x - y).norm()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

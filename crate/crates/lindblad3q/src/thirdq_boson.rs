//! Bosonic third quantization: effective Hamiltonian, noise matrix,
//! steady-state covariance, Liouvillian spectrum, covariance dynamics and
//! the multi-mode Gaussian kernel.

use crate::linalg::{biorthonormal_eigensystem, expm, hermitian_eigenvalues, solve_lyapunov};
use crate::model::{QuadraticLindbladSpec, Statistics, TAU_PSD};
use crate::{ci, creal, czero, lit, to_f64, CMat, CVec, Complex, Error, Real, Result};
use nalgebra::ComplexField;
use serde::Serialize;

/// Stability threshold on `Im(E_σ)`.
pub const TAU_STAB: f64 = 1e-12;
/// Threshold below which `K_eff` and `Q` count as vanishing.
pub const TAU_U1: f64 = 1e-12;
/// Default cap on enumerated spectrum entries.
pub const DEFAULT_SPECTRUM_CAP: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct ThirdQuantizedBoson<T: Real> {
    pub h_eff: CMat<T>,
    pub k_eff: CMat<T>,
    pub n: CMat<T>,
    pub q: CMat<T>,
}

/// `H_eff = H − (i/2)(L − P)`, `K_eff = K − (i/2)(C − Cᵀ)`, `N = L + P`, `Q = (C + Cᵀ)/2`.
///
/// Fails when the noise does not dominate the dissipation,
/// `i(H_eff − H_eff†) ⪯ N`, which no valid Lindbladian violates.
pub fn third_quantize<T: Real>(spec: &QuadraticLindbladSpec<T>) -> Result<ThirdQuantizedBoson<T>> {
    if spec.statistics != Statistics::Boson {
        return Err(Error::InvalidSpec("bosonic third quantization of a fermionic spec".into()));
    }
    let d = spec.dissipators()?;
    let half_i = ci::<T>() * creal(lit::<T>(0.5));
    let tq = ThirdQuantizedBoson {
        h_eff: &spec.h - (&d.l - &d.p) * half_i,
        k_eff: &spec.k - (&d.c - d.c.transpose()) * half_i,
        n: &d.l + &d.p,
        q: (&d.c + d.c.transpose()) * creal(lit::<T>(0.5)),
    };
    let gap = &tq.n - (&tq.h_eff - tq.h_eff.adjoint()) * ci::<T>();
    let min = hermitian_eigenvalues(&gap).first().copied().unwrap_or(T::zero());
    if !(min >= -lit::<T>(TAU_PSD)) {
        return Err(Error::InvalidSpec(format!(
            "dissipation exceeds noise: min eig(N − i(H_eff − H_eff†)) = {:e}",
            to_f64(min)
        )));
    }
    Ok(tq)
}

impl<T: Real> ThirdQuantizedBoson<T> {
    pub fn modes(&self) -> usize {
        self.h_eff.nrows()
    }

    /// True when the pairing terms `K_eff`, `Q` vanish.
    pub fn is_u1_symmetric(&self) -> bool {
        self.k_eff.norm() <= lit(TAU_U1) && self.q.norm() <= lit(TAU_U1)
    }

    fn require_u1(&self, op: &'static str) -> Result<()> {
        if self.is_u1_symmetric() {
            Ok(())
        } else {
            Err(Error::U1Breaking(op))
        }
    }
}

/// Bi-orthonormal eigensystem of `H_eff` plus the steady-state covariance.
#[derive(Clone, Debug)]
pub struct SpectralData<T: Real> {
    pub e: CVec<T>,
    /// Right eigenvectors as columns.
    pub psi_r: CMat<T>,
    /// Left eigenvectors as rows.
    pub psi_l: CMat<T>,
    /// `S_mn = ⟨{a_m, a_n†}⟩` in the steady state.
    pub s_ss: CMat<T>,
}

pub(crate) fn check_stable<T: Real>(h_eff: &CMat<T>) -> Result<Vec<Complex<T>>> {
    let ev = crate::linalg::eigenvalues(h_eff)?;
    let max_im = ev.iter().map(|e| e.im).fold(T::min_value().unwrap_or(-T::one()), |a, b| a.max(b));
    if !ev.is_empty() && !(max_im < -lit::<T>(TAU_STAB)) {
        return Err(Error::Unstable { max_im: to_f64(max_im) });
    }
    Ok(ev)
}

/// Solves `H_eff S − S H_eff† + iN = 0` by Schur back-substitution.
pub fn solve_steady_covariance<T: Real>(tq: &ThirdQuantizedBoson<T>) -> Result<CMat<T>> {
    tq.require_u1("solve_steady_covariance")?;
    check_stable(&tq.h_eff)?;
    let rhs = -(&tq.n * ci::<T>());
    let s = solve_lyapunov(&tq.h_eff, &rhs)?;
    Ok(crate::linalg::hermitian_part(&s))
}

/// Full spectral data; requires a stable, diagonalizable, U(1)-symmetric model.
pub fn spectral_data<T: Real>(tq: &ThirdQuantizedBoson<T>) -> Result<SpectralData<T>> {
    let s_ss = solve_steady_covariance(tq)?;
    let es = biorthonormal_eigensystem(&tq.h_eff)?;
    Ok(SpectralData { e: es.values, psi_r: es.right, psi_l: es.left, s_ss })
}

/// Excitation numbers `μ⃗`, `ν⃗` labelling a Liouvillian eigenvector.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ExcitationIndex {
    pub mu: Vec<u32>,
    pub nu: Vec<u32>,
}

impl ExcitationIndex {
    pub fn new(mu: Vec<u32>, nu: Vec<u32>) -> Self {
        Self { mu, nu }
    }

    pub fn zero(m: usize) -> Self {
        Self { mu: vec![0; m], nu: vec![0; m] }
    }
}

/// `E_{μ⃗,ν⃗} = Σ_σ (E_σ μ_σ − E_σ* ν_σ)`.
pub fn liouvillian_eigenvalue<T: Real>(e: &[Complex<T>], idx: &ExcitationIndex) -> Result<Complex<T>> {
    if idx.mu.len() != e.len() || idx.nu.len() != e.len() {
        return Err(Error::Shape(format!(
            "index lengths ({}, {}) differ from mode count {}",
            idx.mu.len(),
            idx.nu.len(),
            e.len()
        )));
    }
    let mut acc = czero::<T>();
    for (s, es) in e.iter().enumerate() {
        acc += *es * creal(lit::<T>(f64::from(idx.mu[s]))) - es.conj() * creal(lit::<T>(f64::from(idx.nu[s])));
    }
    Ok(acc)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumEntry<T: Real> {
    pub index: ExcitationIndex,
    pub value: Complex<T>,
}

/// Orders by ascending |Im|, then ascending Re, then lexicographic index.
pub(crate) fn sort_spectrum<T: Real>(v: &mut [SpectrumEntry<T>]) {
    v.sort_by(|a, b| {
        let ka = (to_f64(a.value.im.abs()), to_f64(a.value.re));
        let kb = (to_f64(b.value.im.abs()), to_f64(b.value.re));
        ka.0.total_cmp(&kb.0).then(ka.1.total_cmp(&kb.1)).then_with(|| a.index.cmp(&b.index))
    });
}

fn binomial(n: u64, k: u64) -> u128 {
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * u128::from(n - i) / u128::from(i + 1);
    }
    r
}

/// Every index with `Σ(μ_σ + ν_σ) ≤ max_excitations`, sorted; capped at [`DEFAULT_SPECTRUM_CAP`].
pub fn enumerate_spectrum<T: Real>(e: &[Complex<T>], max_excitations: u32) -> Result<Vec<SpectrumEntry<T>>> {
    enumerate_spectrum_capped(e, max_excitations, DEFAULT_SPECTRUM_CAP)
}

pub fn enumerate_spectrum_capped<T: Real>(e: &[Complex<T>], max_excitations: u32, cap: usize) -> Result<Vec<SpectrumEntry<T>>> {
    let m = e.len();
    let slots = 2 * m as u64;
    let count = binomial(slots + u64::from(max_excitations), u64::from(max_excitations));
    if count > cap as u128 {
        return Err(Error::TooMany { count, cap });
    }
    let mut out = Vec::with_capacity(count as usize);
    let mut occ = vec![0u32; 2 * m];
    fn rec<T: Real>(pos: usize, left: u32, occ: &mut Vec<u32>, e: &[Complex<T>], out: &mut Vec<SpectrumEntry<T>>) {
        let m = e.len();
        if pos == occ.len() {
            let index = ExcitationIndex { mu: occ[..m].to_vec(), nu: occ[m..].to_vec() };
            let value = liouvillian_eigenvalue(e, &index).expect("lengths match");
            out.push(SpectrumEntry { index, value });
            return;
        }
        for k in 0..=left {
            occ[pos] = k;
            rec(pos + 1, left - k, occ, e, out);
        }
        occ[pos] = 0;
    }
    rec(0, max_excitations, &mut occ, e, &mut out);
    sort_spectrum(&mut out);
    Ok(out)
}

/// `S(t) = e^{−iH_eff t}(S0 − S_ss)e^{iH_eff† t} + S_ss`.
pub fn evolve_covariance<T: Real>(tq: &ThirdQuantizedBoson<T>, s0: &CMat<T>, t: T) -> Result<CMat<T>> {
    if !(t >= T::zero()) {
        return Err(Error::InvalidParameter("t must be non-negative".into()));
    }
    let m = tq.modes();
    if s0.shape() != (m, m) {
        return Err(Error::Shape(format!("S0 is {:?}, expected {m}x{m}", s0.shape())));
    }
    let s_ss = solve_steady_covariance(tq)?;
    let u = expm(&(&tq.h_eff * (-ci::<T>() * creal(t))));
    let s = &u * (s0 - &s_ss) * u.adjoint() + &s_ss;
    Ok(crate::linalg::hermitian_part(&s))
}

/// Mode-space coefficients of the quasiparticle superoperators.
///
/// Row `σ` of each matrix holds the coefficients of mode `m` in
///
/// * `â_cl(σ) = Σ_m cl[σ,m] â_cl,m + Σ_n cl_q[σ,n] â_q,n`,
/// * `â_cl†(σ) = Σ_m cl_dag[σ,m] â_cl,m† + Σ_n cl_dag_q[σ,n] â_q,n†`,
/// * `â_q(σ) = Σ_m q[σ,m] â_q,m`, `â_q†(σ) = Σ_m q_dag[σ,m] â_q,m†`.
#[derive(Clone, Debug)]
pub struct QuasiparticleCoefficients<T: Real> {
    pub cl: CMat<T>,
    pub cl_q: CMat<T>,
    pub cl_dag: CMat<T>,
    pub cl_dag_q: CMat<T>,
    pub q: CMat<T>,
    pub q_dag: CMat<T>,
}

pub fn quasiparticle_coefficients<T: Real>(sd: &SpectralData<T>) -> QuasiparticleCoefficients<T> {
    let ls = &sd.psi_l * &sd.s_ss;
    QuasiparticleCoefficients {
        cl: sd.psi_l.clone(),
        cl_q: ls.clone(),
        cl_dag: sd.psi_l.conjugate(),
        cl_dag_q: -ls.conjugate(),
        q: sd.psi_r.adjoint(),
        q_dag: sd.psi_r.transpose(),
    }
}

impl<T: Real> QuasiparticleCoefficients<T> {
    /// `[â_cl(σ), â_q†(σ')]` from the single-mode relations `[â_cl,m, â_q,n†] = δ_mn`.
    pub fn commutator_cl_qdag(&self) -> CMat<T> {
        &self.cl * self.q_dag.transpose()
    }

    /// `[â_cl†(σ), −â_q(σ')]`.
    pub fn commutator_cldag_q(&self) -> CMat<T> {
        &self.cl_dag * self.q.transpose()
    }
}

/// `G(t) = ∫_0^t e^{−iH_eff t'} N e^{iH_eff† t'} dt'`.
pub fn keldysh_integral<T: Real>(tq: &ThirdQuantizedBoson<T>, t: T) -> Result<CMat<T>> {
    let m = tq.modes();
    let u = expm(&(&tq.h_eff * (-ci::<T>() * creal(t))));
    if let Ok(s_ss) = solve_steady_covariance(tq) {
        let g = &s_ss - &u * &s_ss * u.adjoint();
        return Ok(crate::linalg::hermitian_part(&g));
    }
    // Van Loan block exponential for marginal or unstable H_eff.
    let mut big = CMat::<T>::zeros(2 * m, 2 * m);
    big.view_mut((0, 0), (m, m)).copy_from(&(&tq.h_eff * (ci::<T>() * creal(t))));
    big.view_mut((0, m), (m, m)).copy_from(&(&tq.n * creal(t)));
    big.view_mut((m, m), (m, m)).copy_from(&(tq.h_eff.adjoint() * (ci::<T>() * creal(t))));
    let e = expm(&big);
    let f = e.view((0, m), (m, m)).into_owned();
    Ok(crate::linalg::hermitian_part(&(u * f)))
}

/// Multi-mode kernel `K(η⃗, α⃗; t) = exp(−η†Gη + η†e^{−iH_eff t}α − α†e^{iH_eff† t}η)`.
pub fn gaussian_kernel<T: Real>(tq: &ThirdQuantizedBoson<T>, eta: &[Complex<T>], alpha: &[Complex<T>], t: T) -> Result<Complex<T>> {
    tq.require_u1("gaussian_kernel")?;
    let m = tq.modes();
    if eta.len() != m || alpha.len() != m {
        return Err(Error::Shape(format!("eta/alpha must have {m} components")));
    }
    if !(t >= T::zero()) {
        return Err(Error::InvalidParameter("t must be non-negative".into()));
    }
    let eta = CVec::<T>::from_column_slice(eta);
    let alpha = CVec::<T>::from_column_slice(alpha);
    let g = keldysh_integral(tq, t)?;
    let u = expm(&(&tq.h_eff * (-ci::<T>() * creal(t))));
    let drift = eta.dotc(&(&u * &alpha));
    let noise = eta.dotc(&(&g * &eta));
    Ok((drift - drift.conj() - noise).exp())
}

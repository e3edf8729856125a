//! Fermionic third quantization.

use crate::linalg::{biorthonormal_eigensystem, hermitian_eigenvalues, solve_lyapunov};
use crate::model::{QuadraticLindbladSpec, Statistics, TAU_PSD};
use crate::thirdq_boson::{check_stable, sort_spectrum, ExcitationIndex, SpectrumEntry, TAU_U1};
use crate::{ci, cplx, creal, lit, to_f64, CMat, CVec, Complex, Error, Real, Result};
use nalgebra::ComplexField;

#[derive(Clone, Debug, PartialEq)]
pub struct ThirdQuantizedFermion<T: Real> {
    pub h_eff: CMat<T>,
    pub k_eff: CMat<T>,
    pub n: CMat<T>,
    pub q: CMat<T>,
}

/// `H_eff = H − (i/2)(L + P)`, `N = L − P`, `K_eff = K − (i/2)(C + Cᵀ)`, `Q = (C − Cᵀ)/2`.
///
/// Fails when `i(H_eff − H_eff†) ⪰ N` is violated (Pauli bound).
pub fn third_quantize_fermion<T: Real>(spec: &QuadraticLindbladSpec<T>) -> Result<ThirdQuantizedFermion<T>> {
    if spec.statistics != Statistics::Fermion {
        return Err(Error::InvalidSpec("fermionic third quantization of a bosonic spec".into()));
    }
    let d = spec.dissipators()?;
    let half_i = ci::<T>() * creal(lit::<T>(0.5));
    let tq = ThirdQuantizedFermion {
        h_eff: &spec.h - (&d.l + &d.p) * half_i,
        k_eff: &spec.k - (&d.c + d.c.transpose()) * half_i,
        n: &d.l - &d.p,
        q: (&d.c - d.c.transpose()) * creal(lit::<T>(0.5)),
    };
    let gap = (&tq.h_eff - tq.h_eff.adjoint()) * ci::<T>() - &tq.n;
    let min = hermitian_eigenvalues(&gap).first().copied().unwrap_or(T::zero());
    if !(min >= -lit::<T>(TAU_PSD)) {
        return Err(Error::InvalidSpec(format!(
            "noise exceeds dissipation: min eig(i(H_eff − H_eff†) − N) = {:e}",
            to_f64(min)
        )));
    }
    Ok(tq)
}

impl<T: Real> ThirdQuantizedFermion<T> {
    pub fn modes(&self) -> usize {
        self.h_eff.nrows()
    }

    pub fn is_u1_symmetric(&self) -> bool {
        self.k_eff.norm() <= lit(TAU_U1) && self.q.norm() <= lit(TAU_U1)
    }
}

#[derive(Clone, Debug)]
pub struct FermionSpectralData<T: Real> {
    pub e: CVec<T>,
    pub psi_r: CMat<T>,
    pub psi_l: CMat<T>,
    /// `A_mn = ⟨[c_m, c_n†]⟩` in the steady state.
    pub a_ss: CMat<T>,
}

/// Solves `H_eff A − A H_eff† + iN = 0`.
pub fn solve_steady_covariance_fermion<T: Real>(tq: &ThirdQuantizedFermion<T>) -> Result<CMat<T>> {
    if !tq.is_u1_symmetric() {
        return Err(Error::U1Breaking("solve_steady_covariance_fermion"));
    }
    check_stable(&tq.h_eff)?;
    let a = solve_lyapunov(&tq.h_eff, &-(&tq.n * ci::<T>()))?;
    Ok(crate::linalg::hermitian_part(&a))
}

/// `A(t) = e^{−iH_eff t}(A0 − A_ss)e^{iH_eff† t} + A_ss`.
pub fn evolve_covariance_fermion<T: Real>(tq: &ThirdQuantizedFermion<T>, a0: &CMat<T>, t: T) -> Result<CMat<T>> {
    if !(t >= T::zero()) {
        return Err(Error::InvalidParameter("t must be non-negative".into()));
    }
    let m = tq.modes();
    if a0.shape() != (m, m) {
        return Err(Error::Shape(format!("A0 is {:?}, expected {m}x{m}", a0.shape())));
    }
    let a_ss = solve_steady_covariance_fermion(tq)?;
    let u = crate::linalg::expm(&(&tq.h_eff * (-ci::<T>() * creal(t))));
    let a = &u * (a0 - &a_ss) * u.adjoint() + &a_ss;
    Ok(crate::linalg::hermitian_part(&a))
}

pub fn fermion_spectral_data<T: Real>(tq: &ThirdQuantizedFermion<T>) -> Result<FermionSpectralData<T>> {
    let a_ss = solve_steady_covariance_fermion(tq)?;
    let es = biorthonormal_eigensystem(&tq.h_eff)?;
    Ok(FermionSpectralData { e: es.values, psi_r: es.right, psi_l: es.left, a_ss })
}

/// All `4^M` eigenvalues `Σ_σ (E_σ μ_σ − E_σ* ν_σ)` with `μ_σ, ν_σ ∈ {0, 1}`, sorted
/// as in [`crate::thirdq_boson::enumerate_spectrum`].
pub fn fermion_spectrum<T: Real>(e: &[Complex<T>], cap: usize) -> Result<Vec<SpectrumEntry<T>>> {
    let m = e.len();
    let count: u128 = 1u128.checked_shl(2 * m as u32).unwrap_or(u128::MAX);
    if m >= 32 || count > cap as u128 {
        return Err(Error::TooMany { count, cap });
    }
    let mut out = Vec::with_capacity(count as usize);
    for bits in 0..(count as u64) {
        let mu: Vec<u32> = (0..m).map(|s| ((bits >> s) & 1) as u32).collect();
        let nu: Vec<u32> = (0..m).map(|s| ((bits >> (m + s)) & 1) as u32).collect();
        let index = ExcitationIndex { mu, nu };
        let value = crate::thirdq_boson::liouvillian_eigenvalue(e, &index)?;
        out.push(SpectrumEntry { index, value });
    }
    sort_spectrum(&mut out);
    Ok(out)
}

/// Exponent coefficients of the single-mode Grassmann kernel:
/// `K = exp(cK ψ̄'₁ψ'₂ + cR ψ̄'₁ψ₁ + cA ψ̄₂ψ'₂)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrassmannKernelCoeffs<T: Real> {
    pub c_k: Complex<T>,
    pub c_r: Complex<T>,
    pub c_a: Complex<T>,
}

/// `cK = −(1−2n̄)(1−e^{−γt})`, `cR = e^{(−iε0−γ/2)t}`, `cA = −e^{(iε0−γ/2)t}`.
pub fn fermion_kernel_single<T: Real>(eps0: T, gamma: T, nbar: T, t: T) -> Result<GrassmannKernelCoeffs<T>> {
    if !(t >= T::zero()) || !(gamma >= T::zero()) || !(nbar >= T::zero() && nbar <= T::one()) {
        return Err(Error::InvalidParameter("need t ≥ 0, γ ≥ 0, n̄ ∈ [0, 1]".into()));
    }
    let two = lit::<T>(2.0);
    let decay = -gamma * t / two;
    Ok(GrassmannKernelCoeffs {
        c_k: creal(-(T::one() - two * nbar) * (T::one() - (-gamma * t).exp())),
        c_r: cplx(decay, -eps0 * t).exp(),
        c_a: -cplx(decay, eps0 * t).exp(),
    })
}

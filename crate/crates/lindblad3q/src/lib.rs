//! Third quantization of quadratic Lindbladians.
//!
//! The crate diagonalizes quadratic bosonic and fermionic master equations
//! through an effective non-Hermitian Hamiltonian and a Lyapunov steady-state
//! covariance, evaluates the Gaussian phase-space propagators of the damped
//! oscillator, and sums the exact Bessel series of the dissipative Kerr
//! oscillator. A brute-force Fock-space Liouvillian ([`oracle`]) provides
//! ground truth for every analytic routine.
//!
//! Conventions used throughout:
//!
//! * time evolution is `i ∂t ρ = L ρ`;
//! * `D[X]ρ = XρX† − {X†X, ρ}/2`;
//! * phase-space variables are √2-scaled, so a Fock coherent state `|β⟩`
//!   has Wigner function `2 exp(−|α − √2 β|²)`;
//! * vectorization stacks columns, `vec(AρB) = (Bᵀ ⊗ A) vec(ρ)`.
//!
//! Every numerical routine is generic over [`Real`] (implemented for `f32`
//! and `f64`). Default tolerances are sized for `f64`; the `*64` aliases
//! below name the double-precision instantiations.

// `!(x >= 0)` deliberately rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod kerr;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod phasespace;
pub mod special;
pub mod thirdq_boson;
pub mod thirdq_fermion;

use nalgebra::{DMatrix, DVector, RealField};
use num_traits::{FromPrimitive, ToPrimitive};
use std::fmt::{Debug, Display};

pub use error::{Error, Result};
pub use nalgebra::Complex;

/// Real scalar the library is generic over.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Dense complex matrix.
pub type CMat<T> = DMatrix<Complex<T>>;
/// Dense complex column vector.
pub type CVec<T> = DVector<Complex<T>>;

pub type Complex64 = Complex<f64>;
pub type CMat64 = CMat<f64>;
pub type CVec64 = CVec<f64>;
pub type Spec64 = model::QuadraticLindbladSpec<f64>;
pub type Dissipators64 = model::DissipatorMatrices<f64>;
pub type ThirdQuantizedBoson64 = thirdq_boson::ThirdQuantizedBoson<f64>;
pub type SpectralData64 = thirdq_boson::SpectralData<f64>;
pub type ThirdQuantizedFermion64 = thirdq_fermion::ThirdQuantizedFermion<f64>;
pub type FermionSpectralData64 = thirdq_fermion::FermionSpectralData<f64>;
pub type DampedOscillator64 = phasespace::DampedOscillatorParams<f64>;
pub type PhaseGrid64 = phasespace::PhaseGrid<f64>;
pub type KerrModel64 = kerr::KerrModel<f64>;
pub type SeriesControl64 = kerr::SeriesControl<f64>;
pub type FockLiouvillian64 = oracle::FockLiouvillian;
pub type DensityMatrix64 = oracle::DensityMatrix;

/// Converts an `f64` literal into the working scalar.
#[inline]
pub(crate) fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("literal representable in scalar type")
}

/// Lossy conversion used for error payloads and reports.
#[inline]
pub(crate) fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[inline]
pub(crate) fn cplx<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn czero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

#[inline]
pub(crate) fn cone<T: Real>() -> Complex<T> {
    Complex::new(T::one(), T::zero())
}

#[inline]
pub(crate) fn ci<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::one())
}

#[inline]
pub(crate) fn creal<T: Real>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

//! Exact dynamics of the dissipative Kerr oscillator
//! `i∂tρ = [ω0 n + (U/2) a†a†aa, ρ] + iκ(n̄+1)D[a]ρ + iκn̄ D[a†]ρ`.
//!
//! All quantities are sums over the harmonic index `l ∈ ℤ` with the complex rate
//! `Γ_l = √(κ² − U²l² + 2iκUl(2n̄+1))`. Coefficients are written in terms of
//! `cosh(Γt/2)` and `sinh(Γt/2)/Γ`, both even in `Γ_l`, which removes the
//! `0/0` at `Γ_l = 0` and makes the branch of the square root irrelevant.

use crate::phasespace::PhaseGrid;
use crate::special::{bessel_j_complex, sinhc};
use crate::{ci, cplx, creal, czero, lit, to_f64, Complex, Error, Real, Result};
use nalgebra::ComplexField;
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KerrModel<T: Real> {
    pub omega0: T,
    pub u: T,
    pub kappa: T,
    pub nth: T,
}

impl<T: Real> KerrModel<T> {
    pub fn new(omega0: T, u: T, kappa: T, nth: T) -> Result<Self> {
        if !(kappa >= T::zero()) || !(nth >= T::zero()) {
            return Err(Error::InvalidParameter("kappa and nth must be non-negative".into()));
        }
        Ok(Self { omega0, u, kappa, nth })
    }

    fn width(&self) -> T {
        lit::<T>(2.0) * self.nth + T::one()
    }
}

/// Truncation policy: stop after `|l| = l_max` or once three consecutive
/// orders contribute less than `term_tol` in magnitude.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesControl<T: Real> {
    pub l_max: u32,
    pub term_tol: T,
}

impl<T: Real> Default for SeriesControl<T> {
    fn default() -> Self {
        Self { l_max: 80, term_tol: lit(1e-14) }
    }
}

impl<T: Real> SeriesControl<T> {
    pub fn new(l_max: u32, term_tol: T) -> Result<Self> {
        if !(term_tol > T::zero()) {
            return Err(Error::InvalidParameter("term_tol must be positive".into()));
        }
        Ok(Self { l_max, term_tol })
    }
}

/// Value of a truncated series together with truncation diagnostics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesValue<T: Real> {
    pub value: Complex<T>,
    /// Highest `|l|` included.
    pub l_used: u32,
    /// Combined magnitude of the three orders following the last one included.
    pub tail_bound: T,
}

/// Coefficients of all three series families for one `(l, t)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KerrCoefficients<T: Real> {
    pub l: i32,
    pub gamma: Complex<T>,
    /// Common prefactor `e^{−i(ω0−U)lt + κt/2}`.
    pub envelope: Complex<T>,
    pub a: Complex<T>,
    pub bq: Complex<T>,
    pub bcl: Complex<T>,
    pub p: Complex<T>,
    pub q: Complex<T>,
    pub r: Complex<T>,
    pub s: Complex<T>,
    /// Propagator family; `None` when the l-th term is a delta distribution.
    pub propagator: Option<PropagatorCoefficients<T>>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PropagatorCoefficients<T: Real> {
    pub d: Complex<T>,
    pub e_plus: Complex<T>,
    pub e_minus: Complex<T>,
    pub f: Complex<T>,
}

/// `Γ_l` on the principal branch.
pub fn gamma_l<T: Real>(m: &KerrModel<T>, l: i32) -> Complex<T> {
    let lf = lit::<T>(f64::from(l));
    let ul = m.u * lf;
    cplx(m.kappa * m.kappa - ul * ul, lit::<T>(2.0) * m.kappa * ul * m.width()).sqrt()
}

fn i_pow_neg<T: Real>(l: i32) -> Complex<T> {
    match l.rem_euclid(4) {
        0 => creal(T::one()),
        1 => cplx(T::zero(), -T::one()),
        2 => creal(-T::one()),
        _ => cplx(T::zero(), T::one()),
    }
}

/// Evaluates every coefficient family for harmonic `l` at time `t`, optionally
/// with an explicit branch for `Γ_l` (both signs give the same coefficients).
pub fn kerr_coefficients_with_gamma<T: Real>(m: &KerrModel<T>, l: i32, t: T, gamma: Complex<T>) -> KerrCoefficients<T> {
    let two = lit::<T>(2.0);
    let lf = lit::<T>(f64::from(l));
    let x = gamma * creal(t / two);
    let c = x.cosh();
    let sh = sinhc(x) * creal(t / two);
    let iul = cplx(T::zero(), m.u * lf);
    let kap = creal(m.kappa);
    let envelope = cplx(m.kappa * t / two, -(m.omega0 - m.u) * lf * t).exp();

    let den = c + kap * sh;
    let a = crate::cone::<T>() / den;
    let bq = (iul + kap * creal(two * m.width())) * sh / den;
    let bcl = iul * sh / den;

    let den2 = c + (iul + kap * creal(two * m.width() - T::one())) * sh;
    let p = creal(two) * envelope * i_pow_neg(l) / den2;
    let q = (c + (iul + kap) * sh) / den2;
    let r = (c - kap * sh) / den2;
    let s = ci::<T>() / den2;

    let den3 = (iul + kap * creal(two * m.width())) * sh;
    let scale = (c.modulus() + (kap * sh).modulus()).max(T::one());
    let propagator = if den3.modulus() > lit::<T>(1e-13) * scale {
        Some(PropagatorCoefficients {
            d: creal(two) * envelope * i_pow_neg(l) / den3,
            e_plus: (c + kap * sh) / den3,
            e_minus: (c - kap * sh) / den3,
            f: ci::<T>() / den3,
        })
    } else {
        None
    };
    KerrCoefficients { l, gamma, envelope, a, bq, bcl, p, q, r, s, propagator }
}

pub fn kerr_coefficients<T: Real>(m: &KerrModel<T>, l: i32, t: T) -> KerrCoefficients<T> {
    kerr_coefficients_with_gamma(m, l, t, gamma_l(m, l))
}

fn polar<T: Real>(z: Complex<T>) -> (T, Complex<T>) {
    let r = z.modulus();
    if r > T::zero() {
        (r, z / creal(r))
    } else {
        (T::zero(), crate::cone())
    }
}

/// Sums `term(l)` over `l = 0, ±1, ±2, …` under `ctrl`.
fn sum_series<T: Real, F>(ctrl: &SeriesControl<T>, term: F) -> Result<SeriesValue<T>>
where
    F: Fn(i32) -> Result<Complex<T>>,
{
    let mut value = term(0)?;
    let mut quiet = 0u32;
    let mut last = value.modulus();
    let mut l_used = 0u32;
    for l in 1..=ctrl.l_max {
        let li = l as i32;
        let pair = term(li)? + term(-li)?;
        let mag = term_mag(&term, li)?;
        value += pair;
        l_used = l;
        last = mag;
        if mag < ctrl.term_tol {
            quiet += 1;
            if quiet >= 3 {
                break;
            }
        } else {
            quiet = 0;
        }
    }
    if quiet < 3 && last >= ctrl.term_tol {
        return Err(Error::SeriesNonConvergence { l_max: ctrl.l_max, last_term: to_f64(last) });
    }
    let mut tail = T::zero();
    for k in 1..=3i32 {
        let li = l_used as i32 + k;
        if li <= crate::special::BESSEL_ENVELOPE as i32 {
            tail += term_mag(&term, li)?;
        }
    }
    Ok(SeriesValue { value, l_used, tail_bound: tail })
}

fn term_mag<T: Real, F>(term: &F, l: i32) -> Result<T>
where
    F: Fn(i32) -> Result<Complex<T>>,
{
    Ok(term(l)?.modulus() + term(-l)?.modulus())
}

/// Kernel `K(η, α; t) = Σ_l e^{−i(ω0−U)lt+κt/2} A_l e^{−B_q|η|² − B_cl|α|²}
/// e^{−il(φ_η−φ_α)} J_l(2|η||α|A_l)`.
pub fn kerr_kernel<T: Real>(m: &KerrModel<T>, eta: Complex<T>, alpha: Complex<T>, t: T, ctrl: &SeriesControl<T>) -> Result<SeriesValue<T>> {
    if !(t >= T::zero()) {
        return Err(Error::InvalidParameter("t must be non-negative".into()));
    }
    let (re, ue) = polar(eta);
    let (ra, ua) = polar(alpha);
    let rot = ue.conj() * ua;
    let two = lit::<T>(2.0);
    sum_series(ctrl, |l| {
        let k = kerr_coefficients(m, l, t);
        let j = bessel_j_complex(l, k.a * creal(two * re * ra))?;
        Ok(k.envelope * k.a * (-(k.bq * creal(re * re)) - k.bcl * creal(ra * ra)).exp() * rot.powi(l) * j)
    })
}

/// `⟨a(t)⟩` (Fock units) for the initial coherent state with Wigner function
/// `2e^{−|α−α0|²}`, i.e. Fock amplitude `α0/√2`:
/// `√2⟨a(t)⟩ = e^{−i(ω0−U)t+κt/2} A_1² α0 /(1+B_cl,1)² · exp(−|α0|² B_cl,1/(1+B_cl,1))`.
pub fn kerr_average_a<T: Real>(m: &KerrModel<T>, alpha0: Complex<T>, t: T) -> Result<Complex<T>> {
    if !(t >= T::zero()) {
        return Err(Error::InvalidParameter("t must be non-negative".into()));
    }
    let k = kerr_coefficients(m, 1, t);
    let one_b = crate::cone::<T>() + k.bcl;
    let v = k.envelope * k.a * k.a * alpha0 / (one_b * one_b) * (-(creal(alpha0.norm_sqr()) * k.bcl / one_b)).exp();
    Ok(v / creal(lit::<T>(2.0).sqrt()))
}

/// Classical-classical propagator
/// `Ξ(β, α; t) = Σ_l D_l e^{−E₊|β|² − E₋|α|²} e^{−il(φ_β−φ_α)} J_l(2|β||α|F_l)`.
pub fn kerr_wigner_propagator<T: Real>(m: &KerrModel<T>, beta: Complex<T>, alpha: Complex<T>, t: T, ctrl: &SeriesControl<T>) -> Result<SeriesValue<T>> {
    if !(t > T::zero()) {
        return Err(Error::DeltaDistribution);
    }
    let (rb, ub) = polar(beta);
    let (ra, ua) = polar(alpha);
    let rot = ub.conj() * ua;
    let two = lit::<T>(2.0);
    sum_series(ctrl, |l| {
        let k = kerr_coefficients(m, l, t);
        let pc = k.propagator.ok_or(Error::DeltaDistribution)?;
        let j = bessel_j_complex(l, pc.f * creal(two * rb * ra))?;
        Ok(pc.d * (-(pc.e_plus * creal(rb * rb)) - pc.e_minus * creal(ra * ra)).exp() * rot.powi(l) * j)
    })
}

/// Wigner function at time `t` for the initial state `2e^{−|α−α0|²}`:
/// `W = Σ_l P_l e^{−Q_l|α|² − R_l|α0|²} e^{−il(φ−Φ)} J_l(2|α||α0|S_l)`.
pub fn kerr_wigner_coherent<T: Real>(m: &KerrModel<T>, alpha: Complex<T>, alpha0: Complex<T>, t: T, ctrl: &SeriesControl<T>) -> Result<SeriesValue<T>> {
    if !(t >= T::zero()) {
        return Err(Error::InvalidParameter("t must be non-negative".into()));
    }
    let (ra, ua) = polar(alpha);
    let (r0, u0) = polar(alpha0);
    let rot = ua.conj() * u0;
    let two = lit::<T>(2.0);
    sum_series(ctrl, |l| {
        let k = kerr_coefficients(m, l, t);
        let j = bessel_j_complex(l, k.s * creal(two * ra * r0))?;
        Ok(k.p * (-(k.q * creal(ra * ra)) - k.r * creal(r0 * r0)).exp() * rot.powi(l) * j)
    })
}

/// Input rings whose angular moment is below this fraction of the largest one
/// are skipped by [`evolve_wigner_grid`].
const MOMENT_FLOOR: f64 = 1e-18;

/// Largest relative normalization drift tolerated by [`evolve_wigner_grid`].
pub const NORMALIZATION_DRIFT: f64 = 1e-3;

/// `W(β; t) = ∫ d²α/(2π) Ξ(β, α; t) W(α; 0)` by grid quadrature.
///
/// The angular structure of `Ξ` is used: for each harmonic `l` the input is
/// reduced to angular moments on rings of equal `|α|`, so the cost is
/// `O(l_max · rings_β · rings_α)` Bessel evaluations.
pub fn evolve_wigner_grid<T: Real>(m: &KerrModel<T>, grid0: &PhaseGrid<T>, t: T, ctrl: &SeriesControl<T>) -> Result<PhaseGrid<T>> {
    if !(t > T::zero()) {
        return Err(Error::DeltaDistribution);
    }
    let rings = Rings::new(grid0);
    // rings carrying a negligible share of the input cannot contribute,
    // since the propagator itself is bounded
    let mass: Vec<T> = rings.members.iter().map(|idx| idx.iter().fold(T::zero(), |a, &p| a + grid0.values[p].modulus())).collect();
    let floor = mass.iter().fold(T::zero(), |a, &b| a.max(b)) * lit::<T>(MOMENT_FLOOR);
    let sources: Vec<usize> = (0..mass.len()).filter(|&k| mass[k] > floor).collect();
    let n = grid0.len();
    let area = grid0.cell_area() / (lit::<T>(2.0) * T::pi());
    let two = lit::<T>(2.0);
    let mut out = vec![czero::<T>(); n];
    let mut quiet = 0u32;
    let mut last: T;
    let mut l = 0i32;
    loop {
        let ls: Vec<i32> = if l == 0 { vec![0] } else { vec![l, -l] };
        let mut order_mag = T::zero();
        for &li in &ls {
            let k = kerr_coefficients(m, li, t);
            let pc = k.propagator.ok_or(Error::DeltaDistribution)?;
            // angular moments of the input on each ring, weighted by e^{−E₋ r²}
            let moments: Vec<(Complex<T>, T)> = sources
                .iter()
                .map(|&ring| {
                    let r = rings.radius[ring];
                    let mut acc = czero::<T>();
                    for &p in &rings.members[ring] {
                        acc += grid0.values[p] * rings.unit[p].powi(li);
                    }
                    (acc * (-(pc.e_minus * creal(r * r))).exp() * creal(area), r)
                })
                .collect();
            let radial: Vec<Complex<T>> = rings
                .radius
                .par_iter()
                .map(|&rb| {
                    let mut acc = czero::<T>();
                    for &(mom, ra) in &moments {
                        if mom != czero() {
                            acc += mom * bessel_j_complex(li, pc.f * creal(two * rb * ra))?;
                        }
                    }
                    Ok(acc * pc.d * (-(pc.e_plus * creal(rb * rb))).exp())
                })
                .collect::<Result<Vec<_>>>()?;
            for (ring, idx) in rings.members.iter().enumerate() {
                for &p in idx {
                    let v = radial[ring] * rings.unit[p].conj().powi(li);
                    order_mag = order_mag.max(v.modulus());
                    out[p] += v;
                }
            }
        }
        last = order_mag;
        if order_mag < ctrl.term_tol {
            quiet += 1;
            if quiet >= 3 {
                break;
            }
        } else {
            quiet = 0;
        }
        if l as u32 >= ctrl.l_max {
            break;
        }
        l += 1;
    }
    if quiet < 3 && last >= ctrl.term_tol {
        return Err(Error::SeriesNonConvergence { l_max: ctrl.l_max, last_term: to_f64(last) });
    }
    let result = PhaseGrid { values: out, ..grid0.clone() };
    let n0 = grid0.normalization().modulus();
    let n1 = result.normalization().modulus();
    if n0 > T::zero() && (n1 - n0).abs() > lit::<T>(NORMALIZATION_DRIFT) * n0 {
        return Err(Error::Numerical(format!(
            "normalization drifted from {:e} to {:e}; enlarge the grid",
            to_f64(n0),
            to_f64(n1)
        )));
    }
    Ok(result)
}

/// Grid points grouped by radius.
struct Rings<T: Real> {
    radius: Vec<T>,
    members: Vec<Vec<usize>>,
    unit: Vec<Complex<T>>,
}

impl<T: Real> Rings<T> {
    fn new(g: &PhaseGrid<T>) -> Self {
        let mut order: Vec<(T, usize)> = (0..g.len()).map(|k| (g.point(k).modulus(), k)).collect();
        order.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
        let mut radius = Vec::new();
        let mut members: Vec<Vec<usize>> = Vec::new();
        let tol = lit::<T>(1e-12) * (g.d_re.abs() + g.d_im.abs());
        for (r, k) in order {
            match radius.last() {
                Some(&last) if (r - last).abs() <= tol => members.last_mut().expect("non-empty").push(k),
                _ => {
                    radius.push(r);
                    members.push(vec![k]);
                }
            }
        }
        let unit = (0..g.len()).map(|k| polar(g.point(k)).1).collect();
        Self { radius, members, unit }
    }
}

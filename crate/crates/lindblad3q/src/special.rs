//! Special functions: complex Bessel J_l, (associated) Laguerre polynomials.

use crate::{cone, creal, czero, lit, to_f64, Complex, Error, Real, Result};
use nalgebra::ComplexField;

/// Largest order and modulus accepted by [`bessel_j_complex`].
pub const BESSEL_ENVELOPE: f64 = 500.0;
/// Below this modulus the ascending series is used.
const SERIES_RADIUS: f64 = 12.0;

/// Bessel function of the first kind `J_l(z)` for integer order and complex argument.
///
/// Uses the ascending series for `|z| ≤ 12` and Miller's downward recurrence
/// otherwise, normalized with the generating function `e^{±iz} = Σ_k (±i)^k ε_k J_k(z)`
/// choosing the sign that makes `|e^{±iz}| ≥ 1`.
pub fn bessel_j_complex<T: Real>(l: i32, z: Complex<T>) -> Result<Complex<T>> {
    let n = l.unsigned_abs();
    let az = z.modulus();
    if f64::from(n) > BESSEL_ENVELOPE || to_f64(az) > BESSEL_ENVELOPE || !to_f64(az).is_finite() {
        return Err(Error::Envelope(format!("J_{l}(z) with |z| = {:e}", to_f64(az))));
    }
    let v = if az <= lit(SERIES_RADIUS) { series(n, z) } else { miller(n, z) };
    Ok(if l < 0 && n % 2 == 1 { -v } else { v })
}

fn series<T: Real>(n: u32, z: Complex<T>) -> Complex<T> {
    let half = z * creal(lit::<T>(0.5));
    let mut term = cone::<T>();
    for j in 1..=n {
        term = term * half / creal(lit::<T>(f64::from(j)));
    }
    if term == czero() {
        return term;
    }
    let q = -(half * half);
    let mut sum = term;
    let eps = T::default_epsilon();
    let mut k = 0u32;
    loop {
        k += 1;
        term = term * q / creal(lit::<T>(f64::from(k) * f64::from(n + k)));
        sum += term;
        if term.modulus() <= eps * sum.modulus() * lit(0.25) && f64::from(k) > to_f64(half.modulus()) {
            break;
        }
        if k > 500 {
            break;
        }
    }
    sum
}

fn miller<T: Real>(n: u32, z: Complex<T>) -> Complex<T> {
    let az = to_f64(z.modulus());
    let top = (f64::from(n).max(az) + 30.0 + 10.0 * az.sqrt()).ceil() as u32;
    let start = top + (top % 2);
    let use_plus = z.im < T::zero();
    let phase = if use_plus { crate::ci::<T>() } else { -crate::ci::<T>() };
    let big = lit::<T>(1e100);
    let tiny = lit::<T>(1e-100);
    let two_over_z = creal(lit::<T>(2.0)) / z;
    let mut jp1 = czero::<T>();
    let mut j = creal(tiny);
    let mut norm = czero::<T>();
    let mut target = czero::<T>();
    if start == n {
        target = j;
    }
    // phase^k for k = start, updated downward
    let mut pk = phase.powi(start as i32);
    let inv_phase = cone::<T>() / phase;
    norm += pk * j * creal(lit::<T>(2.0));
    let mut k = start;
    while k > 0 {
        let jm1 = two_over_z * creal(lit::<T>(f64::from(k))) * j - jp1;
        jp1 = j;
        j = jm1;
        k -= 1;
        pk *= inv_phase;
        let weight = if k == 0 { cone::<T>() } else { creal(lit::<T>(2.0)) };
        norm += pk * j * weight;
        if k == n {
            target = j;
        }
        if j.modulus() > big {
            let s = creal(tiny);
            j *= s;
            jp1 *= s;
            norm *= s;
            target *= s;
        }
    }
    let gen = (phase * z).exp();
    let s = creal(norm.modulus());
    (target / s) * gen / (norm / s)
}

/// Associated Laguerre polynomial `L_n^{(a)}(x)` by the upward three-term recurrence.
pub fn laguerre<T: Real>(n: u32, a: u32, x: T) -> T {
    let af = lit::<T>(f64::from(a));
    let mut lm1 = T::one();
    if n == 0 {
        return lm1;
    }
    let mut l = T::one() + af - x;
    for k in 1..n {
        let kf = lit::<T>(f64::from(k));
        let next = ((lit::<T>(2.0) * kf + T::one() + af - x) * l - (kf + af) * lm1) / (kf + T::one());
        lm1 = l;
        l = next;
    }
    l
}

/// `sqrt(m! / n!)` for `m ≤ n`, computed without forming factorials.
pub fn sqrt_factorial_ratio<T: Real>(m: u32, n: u32) -> T {
    let (lo, hi) = if m <= n { (m, n) } else { (n, m) };
    let mut r = T::one();
    for k in (lo + 1)..=hi {
        r /= lit::<T>(f64::from(k)).sqrt();
    }
    if m <= n {
        r
    } else {
        T::one() / r
    }
}

/// `sinh(x)/x`, even and analytic, with a series near the origin.
pub fn sinhc<T: Real>(x: Complex<T>) -> Complex<T> {
    if x.modulus() < lit(1e-3) {
        let x2 = x * x;
        cone::<T>() + x2 / creal(lit::<T>(6.0)) + x2 * x2 / creal(lit::<T>(120.0)) + x2 * x2 * x2 / creal(lit::<T>(5040.0))
    } else {
        x.sinh() / x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn trivial_values() {
        assert_eq!(bessel_j_complex(0, c(0.0, 0.0)).unwrap(), c(1.0, 0.0));
        assert_eq!(bessel_j_complex(1, c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn j0_of_i() {
        let v = bessel_j_complex(0, c(0.0, 1.0)).unwrap();
        assert!((v - c(1.2660658777520082, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn reference_values() {
        // values from an arbitrary-precision reference implementation
        let cases = [
            (0, c(1.0, 0.0), c(0.7651976865579666, 0.0)),
            (5, c(3.0, 2.0), c(-0.09885798984869187, 0.08592466256292043)),
            (3, c(20.0, 0.0), c(-0.09890139456044968, 0.0)),
            (2, c(15.0, 10.0), c(869.4375557616806, 1751.9759350886225)),
            (40, c(30.0, -5.0), c(-0.00019562398438488634, 0.0007815751701810297)),
            (1, c(0.0, 25.0), c(0.0, 5657865129.878701)),
            (7, c(60.0, 3.0), c(-0.045674935961788385, 1.0128306741224204)),
            (0, c(150.0, -20.0), c(855713.2409520738, -15712453.188453447)),
            (0, c(450.0, -30.0), c(-200_754_207_450.295_87, 28132413.03742119)),
            (12, c(300.0, 250.0), c(-2.105270448612087e106, 6.384725727811952e106)),
            (3, c(480.0, 0.0), c(-0.03610735949955134, 0.0)),
        ];
        for (l, z, want) in cases {
            let got = bessel_j_complex(l, z).unwrap();
            assert!((got - want).norm() <= 1e-11 * want.norm().max(1e-300), "J_{l}({z}) = {got}, want {want}");
        }
    }

    #[test]
    fn negative_order_reflection() {
        let z = c(4.0, 1.5);
        for l in 0..8 {
            let p = bessel_j_complex(l, z).unwrap();
            let m = bessel_j_complex(-l, z).unwrap();
            let s = if l % 2 == 0 { 1.0 } else { -1.0 };
            assert!((m - p * s).norm() < 1e-15 * p.norm().max(1.0));
        }
    }

    #[test]
    fn out_of_envelope() {
        assert!(bessel_j_complex(501, c(1.0, 0.0)).is_err());
        assert!(bessel_j_complex(0, c(550.0, 0.0)).is_err());
    }

    #[test]
    fn laguerre_low_orders() {
        let x = 0.37;
        assert!((laguerre::<f64>(0, 3, x) - 1.0).abs() < 1e-15);
        assert!((laguerre::<f64>(1, 0, x) - (1.0 - x)).abs() < 1e-15);
        assert!((laguerre::<f64>(2, 0, x) - (x * x - 4.0 * x + 2.0) / 2.0).abs() < 1e-15);
        assert!((laguerre::<f64>(2, 1, x) - (x * x / 2.0 - 3.0 * x + 3.0)).abs() < 1e-15);
    }

    #[test]
    fn sinhc_even_and_smooth() {
        for x in [c(1e-5, 2e-5), c(0.3, -0.2), c(0.0, 2.0)] {
            assert!((sinhc(x) - sinhc(-x)).norm() < 1e-15);
        }
        let a = sinhc(c(0.9999e-3, 0.0));
        let b = sinhc(c(1.0001e-3, 0.0));
        assert!((a - b).norm() < 1e-9);
    }
}

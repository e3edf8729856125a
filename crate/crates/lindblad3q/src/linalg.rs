//! Dense complex linear algebra shared by the analytic modules.

use crate::{cone, creal, czero, lit, to_f64, CMat, CVec, Complex, Error, Real, Result};
use nalgebra::ComplexField;

/// Frobenius norm.
pub fn frobenius<T: Real>(m: &CMat<T>) -> T {
    m.norm()
}

/// ‖M − M†‖_F.
pub fn hermitian_residual<T: Real>(m: &CMat<T>) -> T {
    (m - m.adjoint()).norm()
}

/// ‖M − Mᵀ‖_F.
pub fn symmetric_residual<T: Real>(m: &CMat<T>) -> T {
    (m - m.transpose()).norm()
}

/// ‖M + Mᵀ‖_F.
pub fn antisymmetric_residual<T: Real>(m: &CMat<T>) -> T {
    (m + m.transpose()).norm()
}

/// Hermitian part (M + M†)/2.
pub fn hermitian_part<T: Real>(m: &CMat<T>) -> CMat<T> {
    (m + m.adjoint()) * crate::creal(lit::<T>(0.5))
}

/// Ascending eigenvalues of the Hermitian part of `m`.
pub fn hermitian_eigenvalues<T: Real>(m: &CMat<T>) -> Vec<T> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let h = hermitian_part(m);
    let mut ev: Vec<T> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    ev
}

/// Matrix exponential (Padé with scaling and squaring).
pub fn expm<T: Real>(m: &CMat<T>) -> CMat<T> {
    m.exp()
}

/// Complex Schur form `M = Q T Q†` with `T` upper triangular.
pub fn schur<T: Real>(m: &CMat<T>) -> Result<(CMat<T>, CMat<T>)> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::Shape(format!("Schur of a {}x{} matrix", n, m.ncols())));
    }
    if n == 0 {
        return Ok((CMat::zeros(0, 0), CMat::zeros(0, 0)));
    }
    let triangular = (0..n).all(|j| ((j + 1)..n).all(|i| m[(i, j)] == czero()));
    if triangular {
        return Ok((CMat::identity(n, n), m.clone()));
    }
    let (q, mut t) = match m.clone().try_schur(T::default_epsilon(), 10_000 * n) {
        Some(s) => s.unpack(),
        None => {
            // A complex shift breaks exact degeneracies that can stall the QR sweep.
            let shift = crate::cplx(lit::<T>(0.37), lit::<T>(0.61)) * creal(frobenius(m).max(T::one()));
            let shifted = m + CMat::<T>::identity(n, n) * shift;
            let (q, t) = shifted
                .try_schur(T::default_epsilon(), 10_000 * n)
                .ok_or_else(|| Error::Numerical("Schur iteration did not converge".into()))?
                .unpack();
            (q, t - CMat::<T>::identity(n, n) * shift)
        }
    };
    for j in 0..n {
        for i in (j + 1)..n {
            t[(i, j)] = czero();
        }
    }
    Ok((q, t))
}

/// Eigenvalues of a general complex square matrix.
pub fn eigenvalues<T: Real>(m: &CMat<T>) -> Result<Vec<Complex<T>>> {
    let (_, t) = schur(m)?;
    Ok((0..t.nrows()).map(|i| t[(i, i)]).collect())
}

/// Solves `A X − X A† = R` for `X` by Schur back-substitution.
///
/// No diagonalizability is needed; the problem is solvable when no pair of
/// eigenvalues satisfies `λ_i = conj(λ_j)`.
pub fn solve_lyapunov<T: Real>(a: &CMat<T>, r: &CMat<T>) -> Result<CMat<T>> {
    let n = a.nrows();
    if a.ncols() != n || r.nrows() != n || r.ncols() != n {
        return Err(Error::Shape("Lyapunov operands must be square and equal size".into()));
    }
    let (q, t) = schur(a)?;
    let rp = q.adjoint() * r * &q;
    let mut x = CMat::<T>::zeros(n, n);
    let scale = t.norm().max(T::one());
    for i in (0..n).rev() {
        for j in (0..n).rev() {
            let mut acc = rp[(i, j)];
            for k in (i + 1)..n {
                acc -= t[(i, k)] * x[(k, j)];
            }
            for k in (j + 1)..n {
                acc += x[(i, k)] * t[(j, k)].conj();
            }
            let den = t[(i, i)] - t[(j, j)].conj();
            if den.modulus() <= T::default_epsilon() * scale {
                return Err(Error::Numerical(format!(
                    "singular Lyapunov operator (|λ_i − conj λ_j| = {:e})",
                    to_f64(den.modulus())
                )));
            }
            x[(i, j)] = acc / den;
        }
    }
    Ok(&q * x * q.adjoint())
}

/// Bi-orthonormal eigensystem of a non-Hermitian matrix.
#[derive(Clone, Debug)]
pub struct Eigensystem<T: Real> {
    /// Eigenvalues in Schur order.
    pub values: CVec<T>,
    /// Right eigenvectors as columns.
    pub right: CMat<T>,
    /// Left eigenvectors as rows, `left · right = 1`.
    pub left: CMat<T>,
}

/// Degeneracy threshold for eigenvalue clustering.
pub const TAU_DEG: f64 = 1e-8;
/// Largest accepted condition number of a cluster's left/right Gram matrix.
pub const DEFECT_COND: f64 = 1e8;

/// Eigen-decomposition with left eigenvectors rescaled so that `PsiL · PsiR = 1`.
///
/// Vectors are obtained by triangular back-substitution on the Schur form.
/// Eigenvalues closer than [`TAU_DEG`] form a cluster whose left vectors are
/// re-biorthogonalized against the right ones; an ill-conditioned cluster
/// Gram matrix is reported as [`Error::Defective`].
pub fn biorthonormal_eigensystem<T: Real>(m: &CMat<T>) -> Result<Eigensystem<T>> {
    let n = m.nrows();
    let (q, t) = schur(m)?;
    let values = CVec::<T>::from_iterator(n, (0..n).map(|i| t[(i, i)]));
    let small = T::default_epsilon() * t.norm().max(T::one());
    let guard = |d: Complex<T>| if d.modulus() < small { crate::creal(small) } else { d };

    let mut xr = CMat::<T>::zeros(n, n);
    let mut yl = CMat::<T>::zeros(n, n);
    for k in 0..n {
        let lam = t[(k, k)];
        xr[(k, k)] = cone();
        for i in (0..k).rev() {
            let mut acc = czero::<T>();
            for j in (i + 1)..=k {
                acc += t[(i, j)] * xr[(j, k)];
            }
            xr[(i, k)] = -acc / guard(t[(i, i)] - lam);
        }
        yl[(k, k)] = cone();
        for j in (k + 1)..n {
            let mut acc = czero::<T>();
            for i in k..j {
                acc += yl[(k, i)] * t[(i, j)];
            }
            yl[(k, j)] = -acc / guard(t[(j, j)] - lam);
        }
    }
    let mut right = &q * xr;
    let mut left = yl * q.adjoint();
    for k in 0..n {
        let nr = right.column(k).norm();
        if nr > T::zero() {
            right.column_mut(k).unscale_mut(nr);
        }
    }

    let tau = lit::<T>(TAU_DEG);
    let mut assigned = vec![false; n];
    for s in 0..n {
        if assigned[s] {
            continue;
        }
        let mut cluster = vec![s];
        assigned[s] = true;
        let mut grow = true;
        while grow {
            grow = false;
            for j in 0..n {
                if !assigned[j] && cluster.iter().any(|&c| (values[c] - values[j]).modulus() < tau) {
                    cluster.push(j);
                    assigned[j] = true;
                    grow = true;
                }
            }
        }
        let k = cluster.len();
        let mut g = CMat::<T>::zeros(k, k);
        for (a, &ia) in cluster.iter().enumerate() {
            for (b, &ib) in cluster.iter().enumerate() {
                g[(a, b)] = left.row(ia).dot(&right.column(ib).transpose());
            }
        }
        let sv = g.clone().singular_values();
        let smax = sv.max();
        let smin = sv.min();
        let cond = if smin > T::zero() { smax / smin } else { T::max_value().unwrap_or(smax) };
        if !(cond <= lit::<T>(DEFECT_COND)) {
            return Err(Error::Defective(to_f64(cond)));
        }
        let ginv = g
            .try_inverse()
            .ok_or(Error::Defective(f64::INFINITY))?;
        let mut rows = CMat::<T>::zeros(k, n);
        for (a, &ia) in cluster.iter().enumerate() {
            rows.row_mut(a).copy_from(&left.row(ia));
        }
        let fixed = ginv * rows;
        for (a, &ia) in cluster.iter().enumerate() {
            left.row_mut(ia).copy_from(&fixed.row(a));
        }
    }
    Ok(Eigensystem { values, right, left })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn lyapunov_scalar() {
        let a = CMat::<f64>::from_element(1, 1, c(1.0, -0.5));
        let r = CMat::<f64>::from_element(1, 1, c(0.0, -2.0));
        let x = solve_lyapunov(&a, &r).unwrap();
        // (1 − i/2)x − x(1 + i/2) = −i x
        assert!((x[(0, 0)] - c(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn lyapunov_defective_matrix() {
        let a = CMat::<f64>::from_row_slice(2, 2, &[c(1.0, -1.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, -1.0)]);
        let r = CMat::<f64>::from_row_slice(2, 2, &[c(0.0, -1.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, -1.0)]);
        let x = solve_lyapunov(&a, &r).unwrap();
        let res = &a * &x - &x * a.adjoint() - &r;
        assert!(res.norm() < 1e-13);
    }

    #[test]
    fn eigensystem_is_biorthonormal() {
        let m = CMat::<f64>::from_row_slice(
            3,
            3,
            &[c(1.0, -0.2), c(0.3, 0.1), c(0.0, 0.5), c(-0.2, 0.0), c(0.5, -0.4), c(0.1, 0.0), c(0.7, 0.2), c(0.0, -0.3), c(-1.0, -0.1)],
        );
        let es = biorthonormal_eigensystem(&m).unwrap();
        let id = &es.left * &es.right;
        assert!((id - CMat::<f64>::identity(3, 3)).norm() < 1e-12);
        let d = CMat::<f64>::from_diagonal(&es.values);
        assert!((&m * &es.right - &es.right * &d).norm() < 1e-12);
        assert!((&es.left * &m - &d * &es.left).norm() < 1e-12);
    }

    #[test]
    fn degenerate_diagonalizable_cluster() {
        let m = CMat::<f64>::from_diagonal(&CVec::<f64>::from_vec(vec![c(1.0, -0.5), c(1.0, -0.5), c(2.0, -0.1)]));
        let u = expm(&(CMat::<f64>::from_row_slice(3, 3, &[c(0.0, 0.0), c(0.3, 0.2), c(0.1, 0.0), c(-0.3, 0.2), c(0.0, 0.0), c(0.0, 0.4), c(-0.1, 0.0), c(0.0, 0.4), c(0.0, 0.0)])));
        let m = &u * m * u.try_inverse().unwrap();
        let es = biorthonormal_eigensystem(&m).unwrap();
        assert!((&es.left * &es.right - CMat::<f64>::identity(3, 3)).norm() < 1e-10);
    }

    #[test]
    fn jordan_block_is_defective() {
        let m = CMat::<f64>::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(biorthonormal_eigensystem(&m), Err(Error::Defective(_))));
    }
}

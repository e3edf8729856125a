//! Quadratic Lindbladian specifications, validation and JSON model files.

use crate::linalg::{antisymmetric_residual, hermitian_eigenvalues, hermitian_residual, symmetric_residual};
use crate::{lit, to_f64, CMat, Complex, Error, Real, Result};
use serde::{Deserialize, Serialize};

/// Hermiticity / symmetry tolerance on Frobenius residuals.
pub const TAU_HERM: f64 = 1e-10;
/// Positive semi-definiteness tolerance on eigenvalues.
pub const TAU_PSD: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistics {
    Boson,
    Fermion,
}

/// Loss `L`, pump `P` and loss/pump coherence `C` matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct DissipatorMatrices<T: Real> {
    pub l: CMat<T>,
    pub p: CMat<T>,
    pub c: CMat<T>,
}

impl<T: Real> DissipatorMatrices<T> {
    pub fn zeros(m: usize) -> Self {
        Self { l: CMat::zeros(m, m), p: CMat::zeros(m, m), c: CMat::zeros(m, m) }
    }
}

/// Bath description: either coupling coefficients or the dissipator matrices themselves.
#[derive(Clone, Debug, PartialEq)]
pub enum Baths<T: Real> {
    /// `l`, `p` are B×M; bath `b` has jump operator `Σ_m l_bm a_m + p*_bm a_m†`.
    Couplings { l: CMat<T>, p: CMat<T> },
    Direct(DissipatorMatrices<T>),
}

/// Matrices defining a quadratic bosonic or fermionic master equation.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticLindbladSpec<T: Real> {
    pub statistics: Statistics,
    pub h: CMat<T>,
    pub k: CMat<T>,
    pub baths: Baths<T>,
}

/// `L = l† l`, `P = p† p`, `C = l† conj(p)`.
pub fn build_dissipator_matrices<T: Real>(l: &CMat<T>, p: &CMat<T>) -> Result<DissipatorMatrices<T>> {
    if l.shape() != p.shape() {
        return Err(Error::Shape(format!("l is {:?} but p is {:?}", l.shape(), p.shape())));
    }
    let la = l.adjoint();
    Ok(DissipatorMatrices { l: &la * l, p: p.adjoint() * p, c: la * p.conjugate() })
}

impl<T: Real> QuadraticLindbladSpec<T> {
    pub fn new(statistics: Statistics, h: CMat<T>, k: CMat<T>, baths: Baths<T>) -> Result<Self> {
        let m = h.nrows();
        if m == 0 || h.ncols() != m {
            return Err(Error::Shape(format!("H must be square and non-empty, got {:?}", h.shape())));
        }
        if k.shape() != (m, m) {
            return Err(Error::Shape(format!("K is {:?}, expected {m}x{m}", k.shape())));
        }
        match &baths {
            Baths::Couplings { l, p } => {
                if l.ncols() != m || l.shape() != p.shape() {
                    return Err(Error::Shape(format!("l {:?} and p {:?} must both be Bx{m}", l.shape(), p.shape())));
                }
            }
            Baths::Direct(d) => {
                for (name, x) in [("L", &d.l), ("P", &d.p), ("C", &d.c)] {
                    if x.shape() != (m, m) {
                        return Err(Error::Shape(format!("{name} is {:?}, expected {m}x{m}", x.shape())));
                    }
                }
            }
        }
        Ok(Self { statistics, h, k, baths })
    }

    /// Single bosonic mode of frequency `omega0` damped at rate `kappa` into a bath
    /// of occupation `nth`; loss and gain use separate baths so `C = 0`.
    pub fn damped_oscillator(omega0: T, kappa: T, nth: T) -> Self {
        let mut l = CMat::zeros(2, 1);
        let mut p = CMat::zeros(2, 1);
        l[(0, 0)] = crate::creal((kappa * (nth + T::one())).sqrt());
        p[(1, 0)] = crate::creal((kappa * nth).sqrt());
        Self {
            statistics: Statistics::Boson,
            h: CMat::from_element(1, 1, crate::creal(omega0)),
            k: CMat::zeros(1, 1),
            baths: Baths::Couplings { l, p },
        }
    }

    /// Single fermionic level `eps0` with decay rate `gamma` towards occupation `nbar`.
    pub fn fermion_level(eps0: T, gamma: T, nbar: T) -> Self {
        let mut d = DissipatorMatrices::zeros(1);
        d.l[(0, 0)] = crate::creal(gamma * (T::one() - nbar));
        d.p[(0, 0)] = crate::creal(gamma * nbar);
        Self {
            statistics: Statistics::Fermion,
            h: CMat::from_element(1, 1, crate::creal(eps0)),
            k: CMat::zeros(1, 1),
            baths: Baths::Direct(d),
        }
    }

    pub fn modes(&self) -> usize {
        self.h.nrows()
    }

    /// Number of baths when given as couplings.
    pub fn bath_count(&self) -> Option<usize> {
        match &self.baths {
            Baths::Couplings { l, .. } => Some(l.nrows()),
            Baths::Direct(_) => None,
        }
    }

    pub fn dissipators(&self) -> Result<DissipatorMatrices<T>> {
        match &self.baths {
            Baths::Couplings { l, p } => build_dissipator_matrices(l, p),
            Baths::Direct(d) => Ok(d.clone()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Invariant {
    HHermitian,
    KSymmetric,
    KAntisymmetric,
    LHermitian,
    PHermitian,
    LPositive,
    PPositive,
    Shape,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub invariant: Invariant,
    /// Frobenius residual, or the negated smallest eigenvalue for positivity checks.
    pub residual: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every structural invariant of a specification and reports all violations.
pub fn validate_spec<T: Real>(spec: &QuadraticLindbladSpec<T>) -> ValidationReport {
    let tau_h = lit::<T>(TAU_HERM);
    let tau_p = lit::<T>(TAU_PSD);
    let mut report = ValidationReport::default();
    let mut push = |invariant, residual: T| report.violations.push(Violation { invariant, residual: to_f64(residual) });

    let rh = hermitian_residual(&spec.h);
    if !(rh <= tau_h) {
        push(Invariant::HHermitian, rh);
    }
    match spec.statistics {
        Statistics::Boson => {
            let r = symmetric_residual(&spec.k);
            if !(r <= tau_h) {
                push(Invariant::KSymmetric, r);
            }
        }
        Statistics::Fermion => {
            let r = antisymmetric_residual(&spec.k);
            if !(r <= tau_h) {
                push(Invariant::KAntisymmetric, r);
            }
        }
    }
    match spec.dissipators() {
        Err(_) => push(Invariant::Shape, T::one()),
        Ok(d) => {
            for (inv_h, inv_p, x) in [(Invariant::LHermitian, Invariant::LPositive, &d.l), (Invariant::PHermitian, Invariant::PPositive, &d.p)] {
                let r = hermitian_residual(x);
                if !(r <= tau_h) {
                    push(inv_h, r);
                }
                let min = hermitian_eigenvalues(x).first().copied().unwrap_or(T::zero());
                if !(min >= -tau_p) {
                    push(inv_p, -min);
                }
            }
        }
    }
    report
}

type Pairs = Vec<Vec<[f64; 2]>>;

/// On-disk JSON layout. Matrices are row-major nested arrays of `[re, im]` pairs.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub statistics: Statistics,
    pub modes: usize,
    #[serde(rename = "H")]
    pub h: Pairs,
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub k: Option<Pairs>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<Pairs>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Pairs>,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub l_mat: Option<Pairs>,
    #[serde(rename = "P", default, skip_serializing_if = "Option::is_none")]
    pub p_mat: Option<Pairs>,
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    pub c_mat: Option<Pairs>,
}

fn to_mat<T: Real>(name: &str, rows: &Pairs, ncols: Option<usize>) -> Result<CMat<T>> {
    let nr = rows.len();
    let nc = ncols.unwrap_or_else(|| rows.first().map_or(0, Vec::len));
    let mut m = CMat::zeros(nr, nc);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != nc {
            return Err(Error::Parse(format!("{name}: row {i} has {} entries, expected {nc}", row.len())));
        }
        for (j, v) in row.iter().enumerate() {
            m[(i, j)] = Complex::new(lit(v[0]), lit(v[1]));
        }
    }
    Ok(m)
}

fn from_mat<T: Real>(m: &CMat<T>) -> Pairs {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [to_f64(m[(i, j)].re), to_f64(m[(i, j)].im)]).collect()).collect()
}

impl ModelFile {
    pub fn to_spec<T: Real>(&self) -> Result<QuadraticLindbladSpec<T>> {
        let m = self.modes;
        let h = to_mat::<T>("H", &self.h, Some(m))?;
        if h.nrows() != m {
            return Err(Error::Parse(format!("H has {} rows, expected {m}", h.nrows())));
        }
        let k = match &self.k {
            Some(k) => to_mat::<T>("K", k, Some(m))?,
            None => CMat::zeros(m, m),
        };
        let baths = match (&self.l, &self.p, &self.l_mat, &self.p_mat, &self.c_mat) {
            (Some(l), Some(p), None, None, None) => {
                Baths::Couplings { l: to_mat("l", l, Some(m))?, p: to_mat("p", p, Some(m))? }
            }
            (None, None, Some(lm), Some(pm), cm) => Baths::Direct(DissipatorMatrices {
                l: to_mat("L", lm, Some(m))?,
                p: to_mat("P", pm, Some(m))?,
                c: match cm {
                    Some(c) => to_mat("C", c, Some(m))?,
                    None => CMat::zeros(m, m),
                },
            }),
            (None, None, None, None, None) => Baths::Direct(DissipatorMatrices::zeros(m)),
            _ => return Err(Error::Parse("give either (l, p) or (L, P[, C]), not a mixture".into())),
        };
        QuadraticLindbladSpec::new(self.statistics, h, k, baths).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_spec<T: Real>(spec: &QuadraticLindbladSpec<T>) -> Self {
        let mut f = ModelFile {
            statistics: spec.statistics,
            modes: spec.modes(),
            h: from_mat(&spec.h),
            k: Some(from_mat(&spec.k)),
            l: None,
            p: None,
            l_mat: None,
            p_mat: None,
            c_mat: None,
        };
        match &spec.baths {
            Baths::Couplings { l, p } => {
                f.l = Some(from_mat(l));
                f.p = Some(from_mat(p));
            }
            Baths::Direct(d) => {
                f.l_mat = Some(from_mat(&d.l));
                f.p_mat = Some(from_mat(&d.p));
                f.c_mat = Some(from_mat(&d.c));
            }
        }
        f
    }
}

impl<T: Real> QuadraticLindbladSpec<T> {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let f: ModelFile = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        f.to_spec()
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ModelFile::from_spec(self))?)
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
    fn single_bath_thermal_example() {
        let kappa = 1.0;
        let nth = 0.5_f64;
        let l = CMat::<f64>::from_element(1, 1, c((kappa * (nth + 1.0)).sqrt(), 0.0));
        let p = CMat::<f64>::from_element(1, 1, c((kappa * nth).sqrt(), 0.0));
        let d = build_dissipator_matrices(&l, &p).unwrap();
        assert!((d.l[(0, 0)] - c(1.5, 0.0)).norm() < 1e-15);
        assert!((d.p[(0, 0)] - c(0.5, 0.0)).norm() < 1e-15);
        assert!((d.c[(0, 0)] - c(0.75_f64.sqrt(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn zero_couplings() {
        let z = CMat::<f64>::zeros(2, 3);
        let d = build_dissipator_matrices(&z, &z).unwrap();
        assert_eq!(d, DissipatorMatrices::zeros(3));
    }

    #[test]
    fn shape_mismatch() {
        assert!(build_dissipator_matrices(&CMat::<f64>::zeros(2, 3), &CMat::<f64>::zeros(1, 3)).is_err());
    }

    #[test]
    fn validation_flags_wrong_k_symmetry() {
        let h = CMat::<f64>::identity(2, 2);
        let mut k = CMat::<f64>::zeros(2, 2);
        k[(0, 1)] = c(0.3, 0.0);
        k[(1, 0)] = c(-0.3, 0.0);
        let boson = QuadraticLindbladSpec::new(Statistics::Boson, h.clone(), k.clone(), Baths::Direct(DissipatorMatrices::zeros(2))).unwrap();
        let r = validate_spec(&boson);
        assert_eq!(r.violations.len(), 1);
        assert_eq!(r.violations[0].invariant, Invariant::KSymmetric);

        let fermion = QuadraticLindbladSpec::new(Statistics::Fermion, h.clone(), k.clone(), Baths::Direct(DissipatorMatrices::zeros(2))).unwrap();
        assert!(validate_spec(&fermion).passed());

        let ks = k.map(|z| c(z.norm(), 0.0));
        let fermion_sym = QuadraticLindbladSpec::new(Statistics::Fermion, h, ks, Baths::Direct(DissipatorMatrices::zeros(2))).unwrap();
        assert_eq!(validate_spec(&fermion_sym).violations[0].invariant, Invariant::KAntisymmetric);
    }

    #[test]
    fn validation_flags_negative_pump() {
        let mut d = DissipatorMatrices::<f64>::zeros(1);
        d.p[(0, 0)] = c(-0.1, 0.0);
        let s = QuadraticLindbladSpec::new(Statistics::Boson, CMat::identity(1, 1), CMat::zeros(1, 1), Baths::Direct(d)).unwrap();
        let r = validate_spec(&s);
        assert_eq!(r.violations[0].invariant, Invariant::PPositive);
        assert!((r.violations[0].residual - 0.1).abs() < 1e-12);
    }

    #[test]
    fn json_roundtrip() {
        let s = QuadraticLindbladSpec::<f64>::damped_oscillator(1.0, 0.3, 0.5);
        let text = s.to_json_string().unwrap();
        let back = QuadraticLindbladSpec::<f64>::from_json_str(&text).unwrap();
        assert_eq!(s, back);
    }

    #[test]
    fn json_optional_k_defaults_to_zero() {
        let text = r#"{"statistics":"fermion","modes":1,"H":[[[0.5,0]]],"L":[[[0.2,0]]],"P":[[[0.1,0]]]}"#;
        let s = QuadraticLindbladSpec::<f64>::from_json_str(text).unwrap();
        assert_eq!(s.k, CMat::<f64>::zeros(1, 1));
        assert_eq!(s.dissipators().unwrap().c, CMat::<f64>::zeros(1, 1));
    }

    #[test]
    fn json_rejects_mixed_baths() {
        let text = r#"{"statistics":"boson","modes":1,"H":[[[1,0]]],"l":[[[1,0]]],"P":[[[0.1,0]]]}"#;
        assert!(QuadraticLindbladSpec::<f64>::from_json_str(text).is_err());
    }

    #[test]
    fn generic_over_f32() {
        let s = QuadraticLindbladSpec::<f32>::damped_oscillator(1.0, 0.5, 0.25);
        let d = s.dissipators().unwrap();
        assert!((d.l[(0, 0)].re - 0.625).abs() < 1e-6);
    }
}

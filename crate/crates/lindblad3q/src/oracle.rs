//! Brute-force ground truth in truncated bosonic Fock space or the exact
//! fermionic Fock space.
//!
//! The Liouvillian is kept in factored form,
//! `Lρ = H_nh ρ − ρ H_nh† + i Σ_k c_k A_k ρ B_k`,
//! with sparse operators. Under column stacking every term maps to
//! `(B_kᵀ ⊗ A_k)`, and when the generator conserves particle number the
//! vectorized space splits into sectors of fixed `N(i) − N(j)`. Evolution,
//! spectra and steady states are computed sector by sector.
//!
//! The anti-Hermitian part of `H_nh` is assembled from products `B_k A_k` of
//! the truncated matrices themselves, so trace preservation is exact even at
//! the cutoff.
//!
//! This module is fixed to `f64`: it is the reference the generic code is
//! measured against.

use crate::kerr::KerrModel;
use crate::model::{QuadraticLindbladSpec, Statistics};
use crate::{CMat, Error, Result};
use nalgebra::{Complex, DMatrix, DVector};
use nalgebra_sparse::{coo::CooMatrix, CscMatrix, CsrMatrix};
use std::collections::BTreeMap;

type C64 = Complex<f64>;
type Sparse = CsrMatrix<C64>;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Size limits of the oracle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleLimits {
    /// Largest Hilbert-space dimension accepted by the builders.
    pub max_dim: usize,
    /// Sectors up to this size are exponentiated densely.
    pub dense_block: usize,
    /// Largest sector handed to a dense eigen- or linear solver.
    pub max_dense_solve: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self { max_dim: 1024, dense_block: 400, max_dense_solve: 2500 }
    }
}

/// Largest fermionic mode count accepted.
pub const MAX_FERMION_MODES: usize = 8;

#[derive(Clone, Debug)]
struct Jump {
    coef: C64,
    a: CscMatrix<C64>,
    b: Sparse,
}

/// Factored Liouvillian on a finite Fock space.
#[derive(Clone, Debug)]
pub struct FockLiouvillian {
    statistics: Statistics,
    dims: Vec<usize>,
    d: usize,
    hnh: CscMatrix<C64>,
    hnh_adj: Sparse,
    hnh_csr: Sparse,
    jumps: Vec<Jump>,
    number: Vec<i64>,
    u1: bool,
    limits: OracleLimits,
}

/// Occupation numbers of basis state `k` (mode 0 varies fastest).
fn occupations(dims: &[usize], mut k: usize) -> Vec<usize> {
    dims.iter()
        .map(|&n| {
            let o = k % n;
            k /= n;
            o
        })
        .collect()
}

fn sparse_from(d: usize, entries: impl IntoIterator<Item = (usize, usize, C64)>) -> Sparse {
    let mut coo = CooMatrix::new(d, d);
    for (i, j, v) in entries {
        if v != ZERO {
            coo.push(i, j, v);
        }
    }
    CsrMatrix::from(&coo)
}

fn adjoint(m: &Sparse) -> Sparse {
    let mut t = m.transpose();
    for v in t.values_mut() {
        *v = v.conj();
    }
    t
}

fn scale(m: &Sparse, c: C64) -> Sparse {
    let mut out = m.clone();
    for v in out.values_mut() {
        *v *= c;
    }
    out
}

fn add(a: &Sparse, b: &Sparse) -> Sparse {
    a + b
}

/// Truncated bosonic annihilation operator of `mode`.
pub fn boson_annihilator(dims: &[usize], mode: usize) -> Result<Sparse> {
    if mode >= dims.len() {
        return Err(Error::Shape(format!("mode {mode} out of range")));
    }
    let d: usize = dims.iter().product();
    let stride: usize = dims[..mode].iter().product();
    Ok(sparse_from(
        d,
        (0..d).filter_map(|k| {
            let n = (k / stride) % dims[mode];
            (n > 0).then(|| (k - stride, k, C64::new((n as f64).sqrt(), 0.0)))
        }),
    ))
}

/// Jordan–Wigner fermionic annihilation operator of `mode` on `m` modes.
pub fn fermion_annihilator(m: usize, mode: usize) -> Result<Sparse> {
    if mode >= m {
        return Err(Error::Shape(format!("mode {mode} out of range")));
    }
    let d = 1usize << m;
    Ok(sparse_from(
        d,
        (0..d).filter_map(|k| {
            if (k >> mode) & 1 == 0 {
                return None;
            }
            let string = (k & ((1 << mode) - 1)).count_ones();
            let sign = if string.is_multiple_of(2) { 1.0 } else { -1.0 };
            Some((k ^ (1 << mode), k, C64::new(sign, 0.0)))
        }),
    ))
}

/// Particle-number shifts `N(row) − N(col)` present in `m`.
fn shifts(m: &Sparse, number: &[i64]) -> Vec<i64> {
    let mut s: Vec<i64> = m.triplet_iter().filter(|t| *t.2 != ZERO).map(|(i, j, _)| number[i] - number[j]).collect();
    s.sort_unstable();
    s.dedup();
    s
}

impl FockLiouvillian {
    fn assemble(statistics: Statistics, dims: Vec<usize>, h: Sparse, jumps: Vec<(C64, Sparse, Sparse)>, limits: OracleLimits) -> Self {
        let d = h.nrows();
        let number: Vec<i64> = (0..d).map(|k| occupations(&dims, k).iter().sum::<usize>() as i64).collect();
        let mut hnh = h;
        for (c, a, b) in &jumps {
            hnh = add(&hnh, &scale(&(b * a), C64::new(0.0, -0.5) * c));
        }
        let mut u1 = shifts(&hnh, &number).iter().all(|&s| s == 0);
        for (_, a, b) in &jumps {
            let sa = shifts(a, &number);
            let sb = shifts(b, &number);
            if !(sa.is_empty() || sb.is_empty()) && !(sa.len() == 1 && sb.len() == 1 && sa[0] + sb[0] == 0) {
                u1 = false;
            }
        }
        let jumps = jumps.into_iter().map(|(coef, a, b)| Jump { coef, a: CscMatrix::from(&a), b }).collect();
        Self {
            statistics,
            dims,
            d,
            hnh_adj: adjoint(&hnh),
            hnh: CscMatrix::from(&hnh),
            hnh_csr: hnh,
            jumps,
            number,
            u1,
            limits,
        }
    }

    pub fn statistics(&self) -> Statistics {
        self.statistics
    }

    /// Per-mode local dimensions (2 for fermions).
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Hilbert-space dimension `D`.
    pub fn dim(&self) -> usize {
        self.d
    }

    /// Whether the generator conserves total particle number.
    pub fn is_u1(&self) -> bool {
        self.u1
    }

    /// `Lρ`, the right-hand side of `i∂tρ = Lρ`.
    pub fn apply(&self, rho: &CMat<f64>) -> Result<CMat<f64>> {
        if rho.shape() != (self.d, self.d) {
            return Err(Error::Shape(format!("expected {0}×{0} operator", self.d)));
        }
        let mut out = &self.hnh_csr * rho - right_mul(rho, &self.hnh_adj);
        for j in &self.jumps {
            let a = CsrMatrix::from(&j.a);
            out += (&a * &right_mul(rho, &j.b)) * (I * j.coef);
        }
        Ok(out)
    }

    /// `max_j |Σ_i (Lρ)_ii|` over the unit matrices `ρ = |a⟩⟨b|`, i.e. the
    /// size of the trace functional applied to the superoperator.
    pub fn trace_residual(&self) -> f64 {
        // Σ_i (Lρ)_ii = Tr[(H_nh − H_nh† + iΣ c B A) ρ]: the row vector of the
        // trace functional is the transpose of that operator.
        let mut g = add(&self.hnh_csr, &scale(&self.hnh_adj, -ONE));
        for j in &self.jumps {
            g = add(&g, &scale(&(&j.b * &CsrMatrix::from(&j.a)), I * j.coef));
        }
        g.values().iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Vectorized index sets of the invariant sectors, keyed by `N(i) − N(j)`.
    /// A generator that breaks particle-number conservation has a single sector.
    pub fn sectors(&self) -> Vec<(i64, Vec<usize>)> {
        let d = self.d;
        if !self.u1 {
            return vec![(0, (0..d * d).collect())];
        }
        let mut map: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
        for j in 0..d {
            for i in 0..d {
                map.entry(self.number[i] - self.number[j]).or_default().push(i + j * d);
            }
        }
        map.into_iter().collect()
    }

    /// Sparse matrix of `L` restricted to the vectorized indices `idx`.
    pub fn block(&self, idx: &[usize]) -> Result<Sparse> {
        let d = self.d;
        let mut local = vec![usize::MAX; d * d];
        for (p, &k) in idx.iter().enumerate() {
            local[k] = p;
        }
        let n = idx.len();
        let mut coo = CooMatrix::new(n, n);
        let mut push = |i: usize, j: usize, col: usize, v: C64| -> Result<()> {
            let row = local[i + j * d];
            if row == usize::MAX {
                return Err(Error::Numerical("term leaves the sector".into()));
            }
            coo.push(row, col, v);
            Ok(())
        };
        for (col, &k) in idx.iter().enumerate() {
            let (i, j) = (k % d, k / d);
            let hc = self.hnh.col(i);
            for (&r, &v) in hc.row_indices().iter().zip(hc.values()) {
                push(r, j, col, v)?;
            }
            let ar = self.hnh_adj.row(j);
            for (&c, &v) in ar.col_indices().iter().zip(ar.values()) {
                push(i, c, col, -v)?;
            }
            for jump in &self.jumps {
                let ac = jump.a.col(i);
                let br = jump.b.row(j);
                for (&r, &va) in ac.row_indices().iter().zip(ac.values()) {
                    for (&c, &vb) in br.col_indices().iter().zip(br.values()) {
                        push(r, c, col, I * jump.coef * va * vb)?;
                    }
                }
            }
        }
        Ok(CsrMatrix::from(&coo))
    }

    /// Full `D² × D²` matrix in the column-stacking convention.
    pub fn to_dense(&self) -> Result<CMat<f64>> {
        let n = self.d * self.d;
        if n > self.limits.max_dense_solve {
            return Err(Error::OracleCap { dim: n, cap: self.limits.max_dense_solve });
        }
        let idx: Vec<usize> = (0..n).collect();
        Ok(dense(&self.block(&idx)?))
    }

    /// All eigenvalues of `L`, sector by sector.
    pub fn eigenvalues(&self) -> Result<Vec<C64>> {
        let mut out = Vec::with_capacity(self.d * self.d);
        for (_, idx) in self.sectors() {
            if idx.len() > self.limits.max_dense_solve {
                return Err(Error::OracleCap { dim: idx.len(), cap: self.limits.max_dense_solve });
            }
            out.extend(crate::linalg::eigenvalues(&dense(&self.block(&idx)?))?);
        }
        Ok(out)
    }

    /// Eigenvalues of the charge-`q` sector only.
    pub fn sector_eigenvalues(&self, q: i64) -> Result<Vec<C64>> {
        let (_, idx) = self
            .sectors()
            .into_iter()
            .find(|(k, _)| *k == q)
            .ok_or_else(|| Error::InvalidParameter(format!("no sector {q}")))?;
        if idx.len() > self.limits.max_dense_solve {
            return Err(Error::OracleCap { dim: idx.len(), cap: self.limits.max_dense_solve });
        }
        crate::linalg::eigenvalues(&dense(&self.block(&idx)?))
    }

    /// Unit-trace null vector of `L`.
    pub fn steady_state(&self) -> Result<DensityMatrix> {
        let d = self.d;
        let (_, idx) = self.sectors().into_iter().find(|(q, _)| *q == 0).expect("sector 0 exists");
        if idx.len() > self.limits.max_dense_solve {
            return Err(Error::OracleCap { dim: idx.len(), cap: self.limits.max_dense_solve });
        }
        let mut m = dense(&self.block(&idx)?);
        let diag: Vec<usize> = (0..idx.len()).filter(|&p| idx[p] % d == idx[p] / d).collect();
        let row = diag[0];
        for c in 0..idx.len() {
            m[(row, c)] = ZERO;
        }
        for &p in &diag {
            m[(row, p)] = ONE;
        }
        let mut rhs = DVector::from_element(idx.len(), ZERO);
        rhs[row] = ONE;
        let x = m.lu().solve(&rhs).ok_or_else(|| Error::Numerical("singular steady-state system".into()))?;
        let mut rho = DMatrix::from_element(d, d, ZERO);
        for (p, &k) in idx.iter().enumerate() {
            rho[(k % d, k / d)] = x[p];
        }
        let rho = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
        Ok(DensityMatrix { dims: self.dims.clone(), rho })
    }

    /// `ρ(t) = e^{−iLt} ρ0`.
    pub fn evolve_density(&self, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
        Ok(self.evolve_trajectory(rho0, &[t])?.pop().expect("one time"))
    }

    /// `ρ(t_k)` for ascending non-negative times. Dense sector propagators are
    /// cached per distinct step.
    pub fn evolve_trajectory(&self, rho0: &DensityMatrix, times: &[f64]) -> Result<Vec<DensityMatrix>> {
        let d = self.d;
        if rho0.rho.shape() != (d, d) {
            return Err(Error::Shape(format!("expected {0}×{0} density matrix", d)));
        }
        if times.iter().any(|t| !(*t >= 0.0)) || times.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidParameter("times must be non-negative and ascending".into()));
        }
        let mut out: Vec<CMat<f64>> = vec![DMatrix::from_element(d, d, ZERO); times.len()];
        for (_, idx) in self.sectors() {
            let mut v = DVector::from_iterator(idx.len(), idx.iter().map(|&k| rho0.rho[(k % d, k / d)]));
            if v.iter().all(|z| *z == ZERO) {
                continue;
            }
            let block = self.block(&idx)?;
            let dense_path = idx.len() <= self.limits.dense_block;
            let mut cache: Vec<(f64, CMat<f64>)> = Vec::new();
            let mut now = 0.0;
            for (slot, &t) in times.iter().enumerate() {
                let dt = t - now;
                if dt > 0.0 {
                    v = if dense_path {
                        let pos = cache.iter().position(|(s, _)| (s - dt).abs() <= 1e-13 * dt.max(1.0));
                        let pos = match pos {
                            Some(p) => p,
                            None => {
                                cache.push((dt, (dense(&block) * C64::new(0.0, -dt)).exp()));
                                cache.len() - 1
                            }
                        };
                        &cache[pos].1 * &v
                    } else {
                        expm_multiply(&block, &v, dt)
                    };
                }
                now = t;
                for (p, &k) in idx.iter().enumerate() {
                    out[slot][(k % d, k / d)] = v[p];
                }
            }
        }
        Ok(out.into_iter().map(|rho| DensityMatrix { dims: rho0.dims.clone(), rho }).collect())
    }
}

/// `ρ B` for dense `ρ` and sparse `B`.
fn right_mul(rho: &CMat<f64>, b: &Sparse) -> CMat<f64> {
    let n = rho.nrows();
    let mut out = DMatrix::from_element(n, b.ncols(), ZERO);
    for (j, row) in b.row_iter().enumerate() {
        for (&c, &v) in row.col_indices().iter().zip(row.values()) {
            for i in 0..n {
                out[(i, c)] += rho[(i, j)] * v;
            }
        }
    }
    out
}

fn dense(m: &Sparse) -> CMat<f64> {
    let mut out = DMatrix::from_element(m.nrows(), m.ncols(), ZERO);
    for (i, j, v) in m.triplet_iter() {
        out[(i, j)] += *v;
    }
    out
}

fn matvec(m: &Sparse, v: &DVector<C64>) -> DVector<C64> {
    DVector::from_iterator(
        m.nrows(),
        m.row_iter().map(|row| row.col_indices().iter().zip(row.values()).map(|(&c, &a)| a * v[c]).sum()),
    )
}

/// `e^{−iBt} v` by a truncated Taylor series with time stepping sized to the
/// 1-norm of `B t`.
fn expm_multiply(b: &Sparse, v: &DVector<C64>, t: f64) -> DVector<C64> {
    let mut colsum = vec![0.0; b.ncols()];
    for (_, j, a) in b.triplet_iter() {
        colsum[j] += a.norm();
    }
    let norm = colsum.iter().copied().fold(0.0, f64::max) * t;
    let steps = (norm / 2.0).ceil().max(1.0) as usize;
    let h = C64::new(0.0, -t / steps as f64);
    let mut x = v.clone();
    for _ in 0..steps {
        let mut term = x.clone();
        let mut acc = x.clone();
        let mut small = 0;
        for k in 1..=60 {
            term = matvec(b, &term) * (h / k as f64);
            acc += &term;
            let tn = term.camax();
            if tn <= 1e-17 * acc.camax() {
                small += 1;
                if small == 2 {
                    break;
                }
            } else {
                small = 0;
            }
        }
        x = acc;
    }
    x
}

/// Builds the oracle for a quadratic spec with per-mode cutoffs `dims`
/// (ignored entries for fermions, whose local dimension is always 2).
pub fn build_boson_liouvillian(spec: &QuadraticLindbladSpec<f64>, dims: &[usize], limits: OracleLimits) -> Result<FockLiouvillian> {
    if spec.statistics != Statistics::Boson {
        return Err(Error::InvalidSpec("bosonic oracle for a fermionic spec".into()));
    }
    if dims.len() != spec.modes() || dims.iter().any(|&n| n < 2) {
        return Err(Error::Shape("one cutoff ≥ 2 per mode required".into()));
    }
    let d = dims.iter().try_fold(1usize, |acc, &n| acc.checked_mul(n)).unwrap_or(usize::MAX);
    if d > limits.max_dim {
        return Err(Error::OracleCap { dim: d, cap: limits.max_dim });
    }
    let a: Vec<Sparse> = (0..spec.modes()).map(|m| boson_annihilator(dims, m)).collect::<Result<_>>()?;
    quadratic_liouvillian(spec, Statistics::Boson, dims.to_vec(), &a, limits)
}

/// Exact oracle for a fermionic spec on `2^M` states.
pub fn build_fermion_liouvillian(spec: &QuadraticLindbladSpec<f64>, limits: OracleLimits) -> Result<FockLiouvillian> {
    if spec.statistics != Statistics::Fermion {
        return Err(Error::InvalidSpec("fermionic oracle for a bosonic spec".into()));
    }
    let m = spec.modes();
    if m > MAX_FERMION_MODES {
        return Err(Error::OracleCap { dim: m, cap: MAX_FERMION_MODES });
    }
    let a: Vec<Sparse> = (0..m).map(|k| fermion_annihilator(m, k)).collect::<Result<_>>()?;
    quadratic_liouvillian(spec, Statistics::Fermion, vec![2; m], &a, limits)
}

fn quadratic_liouvillian(
    spec: &QuadraticLindbladSpec<f64>,
    statistics: Statistics,
    dims: Vec<usize>,
    a: &[Sparse],
    limits: OracleLimits,
) -> Result<FockLiouvillian> {
    let m = a.len();
    let d = a[0].nrows();
    let ad: Vec<Sparse> = a.iter().map(adjoint).collect();
    let dis = spec.dissipators()?;
    let mut h = CsrMatrix::zeros(d, d);
    for n in 0..m {
        for k in 0..m {
            if spec.h[(n, k)] != ZERO {
                h = add(&h, &scale(&(&ad[n] * &a[k]), spec.h[(n, k)]));
            }
            if spec.k[(n, k)] != ZERO {
                let pair = &ad[n] * &ad[k];
                h = add(&h, &scale(&pair, spec.k[(n, k)] * 0.5));
                h = add(&h, &scale(&adjoint(&pair), spec.k[(n, k)].conj() * 0.5));
            }
        }
    }
    let mut jumps = Vec::new();
    for n in 0..m {
        for k in 0..m {
            let (l, p, c) = (dis.l[(n, k)], dis.p[(n, k)], dis.c[(n, k)]);
            if l != ZERO {
                jumps.push((l, a[k].clone(), ad[n].clone()));
            }
            if p != ZERO {
                jumps.push((p, ad[n].clone(), a[k].clone()));
            }
            if c != ZERO {
                jumps.push((c, ad[k].clone(), ad[n].clone()));
                jumps.push((c.conj(), a[n].clone(), a[k].clone()));
            }
        }
    }
    Ok(FockLiouvillian::assemble(statistics, dims, h, jumps, limits))
}

/// Oracle for the Kerr oscillator with Fock cutoff `nc`.
pub fn build_kerr_liouvillian(model: &KerrModel<f64>, nc: usize, limits: OracleLimits) -> Result<FockLiouvillian> {
    if nc < 2 {
        return Err(Error::Shape("cutoff must be at least 2".into()));
    }
    if nc > limits.max_dim {
        return Err(Error::OracleCap { dim: nc, cap: limits.max_dim });
    }
    let a = boson_annihilator(&[nc], 0)?;
    let ad = adjoint(&a);
    let n = &ad * &a;
    let h = add(&scale(&n, C64::new(model.omega0, 0.0)), &scale(&(&(&ad * &ad) * &(&a * &a)), C64::new(model.u / 2.0, 0.0)));
    let mut jumps = Vec::new();
    let loss = model.kappa * (model.nth + 1.0);
    let gain = model.kappa * model.nth;
    if loss != 0.0 {
        jumps.push((C64::new(loss, 0.0), a.clone(), ad.clone()));
    }
    if gain != 0.0 {
        jumps.push((C64::new(gain, 0.0), ad.clone(), a.clone()));
    }
    Ok(FockLiouvillian::assemble(Statistics::Boson, vec![nc], h, jumps, limits))
}

/// Density matrix on a product Fock space.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    pub dims: Vec<usize>,
    pub rho: CMat<f64>,
}

impl DensityMatrix {
    pub fn new(dims: Vec<usize>, rho: CMat<f64>) -> Result<Self> {
        let d: usize = dims.iter().product();
        if rho.shape() != (d, d) {
            return Err(Error::Shape(format!("expected {0}×{0} matrix", d)));
        }
        Ok(Self { dims, rho })
    }

    pub fn trace(&self) -> C64 {
        self.rho.trace()
    }

    pub fn hermitian_residual(&self) -> f64 {
        (&self.rho - self.rho.adjoint()).norm()
    }

    /// `Tr(X ρ)`.
    pub fn expect(&self, x: &Sparse) -> C64 {
        x.triplet_iter().map(|(i, j, v)| *v * self.rho[(j, i)]).sum()
    }

    /// Largest population among the top `levels` Fock levels of `mode`.
    pub fn edge_population(&self, mode: usize, levels: usize) -> f64 {
        let n = self.dims[mode];
        (0..self.rho.nrows())
            .filter(|&k| occupations(&self.dims, k)[mode] + levels >= n)
            .map(|k| self.rho[(k, k)].re.abs())
            .fold(0.0, f64::max)
    }

    /// Tensor product, with `self` on the lower-index modes.
    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        DensityMatrix { dims, rho: other.rho.kronecker(&self.rho) }
    }
}

/// Largest norm discarded by truncating a coherent state.
pub const COHERENT_TRUNCATION_TOL: f64 = 1e-10;

/// `|β⟩⟨β|` in Fock units (Wigner centre `√2β`), truncated and renormalized.
pub fn coherent_state(beta: C64, nc: usize) -> Result<DensityMatrix> {
    let mut amp = Vec::with_capacity(nc);
    let mut c = C64::new((-beta.norm_sqr() / 2.0).exp(), 0.0);
    for n in 0..nc {
        if n > 0 {
            c *= beta / (n as f64).sqrt();
        }
        amp.push(c);
    }
    let kept: f64 = amp.iter().map(|z| z.norm_sqr()).sum();
    if 1.0 - kept > COHERENT_TRUNCATION_TOL {
        return Err(Error::Envelope(format!("cutoff {nc} discards weight {:e}", 1.0 - kept)));
    }
    let v = DVector::from_vec(amp) / C64::new(kept.sqrt(), 0.0);
    Ok(DensityMatrix { dims: vec![nc], rho: &v * v.adjoint() })
}

pub fn fock_state(n: usize, nc: usize) -> Result<DensityMatrix> {
    if n >= nc {
        return Err(Error::Envelope(format!("level {n} outside cutoff {nc}")));
    }
    let mut rho = DMatrix::from_element(nc, nc, ZERO);
    rho[(n, n)] = ONE;
    Ok(DensityMatrix { dims: vec![nc], rho })
}

/// Thermal state with mean occupation `nbar`, truncated and renormalized.
pub fn thermal_state(nbar: f64, nc: usize) -> Result<DensityMatrix> {
    if !(nbar >= 0.0) {
        return Err(Error::InvalidParameter("nbar must be non-negative".into()));
    }
    let x = nbar / (nbar + 1.0);
    let w: Vec<f64> = (0..nc).map(|n| x.powi(n as i32)).collect();
    let z: f64 = w.iter().sum();
    if x.powi(nc as i32) > COHERENT_TRUNCATION_TOL {
        return Err(Error::Envelope(format!("cutoff {nc} too small for nbar {nbar}")));
    }
    let rho = DMatrix::from_fn(nc, nc, |i, j| if i == j { C64::new(w[i] / z, 0.0) } else { ZERO });
    Ok(DensityMatrix { dims: vec![nc], rho })
}

/// Symmetrized covariance `⟨{a_m, a_n†}⟩`.
pub fn boson_covariance(rho: &DensityMatrix) -> Result<CMat<f64>> {
    let m = rho.dims.len();
    let a: Vec<Sparse> = (0..m).map(|k| boson_annihilator(&rho.dims, k)).collect::<Result<_>>()?;
    let ad: Vec<Sparse> = a.iter().map(adjoint).collect();
    Ok(DMatrix::from_fn(m, m, |i, j| rho.expect(&(&a[i] * &ad[j])) + rho.expect(&(&ad[j] * &a[i]))))
}

/// Anti-symmetrized covariance `⟨[c_m, c_n†]⟩`.
pub fn fermion_covariance(rho: &DensityMatrix) -> Result<CMat<f64>> {
    let m = rho.dims.len();
    let c: Vec<Sparse> = (0..m).map(|k| fermion_annihilator(m, k)).collect::<Result<_>>()?;
    let cd: Vec<Sparse> = c.iter().map(adjoint).collect();
    Ok(DMatrix::from_fn(m, m, |i, j| rho.expect(&(&c[i] * &cd[j])) - rho.expect(&(&cd[j] * &c[i]))))
}

/// Displacement operators `D(γ)` acting on operators supported on the first
/// `n` Fock levels, computed exactly from the spectral decomposition of
/// `a + a†` on a padded space large enough for `|γ| ≤ max_abs`.
#[derive(Clone, Debug)]
pub struct DisplacementOracle {
    n: usize,
    max_abs: f64,
    lambda: DVector<f64>,
    /// Eigenvectors of `a + a†` on the padded space.
    v: DMatrix<f64>,
}

impl DisplacementOracle {
    pub fn new(n: usize, max_abs: f64) -> Result<Self> {
        if n == 0 || !(max_abs >= 0.0) {
            return Err(Error::InvalidParameter("need n > 0 and max_abs ≥ 0".into()));
        }
        let r = (n as f64).sqrt() + max_abs;
        let np = (r * r + 8.0 * r + 40.0).ceil() as usize;
        let x = DMatrix::from_fn(np, np, |i, j| {
            if i + 1 == j {
                (j as f64).sqrt()
            } else if j + 1 == i {
                (i as f64).sqrt()
            } else {
                0.0
            }
        });
        let eig = x.symmetric_eigen();
        Ok(Self { n, max_abs, lambda: eig.eigenvalues, v: eig.eigenvectors })
    }

    pub fn max_abs(&self) -> f64 {
        self.max_abs
    }

    /// Rows `0..n`, columns `0..cols` of `D(γ) = exp(γa† − γ*a)`.
    ///
    /// With `θ' = arg γ − π/2`, `γa† − γ*a = i|γ| R (a + a†) R†` where
    /// `R = e^{iθ' n}`.
    fn block(&self, gamma: C64, cols: usize) -> Result<CMat<f64>> {
        let r = gamma.norm();
        if r > self.max_abs * (1.0 + 1e-12) {
            return Err(Error::Envelope(format!("|γ| = {r} exceeds prepared range {}", self.max_abs)));
        }
        let theta = if r > 0.0 { gamma.arg() - std::f64::consts::FRAC_PI_2 } else { 0.0 };
        let n = self.n;
        let np = self.lambda.len();
        let left = DMatrix::from_fn(n, np, |i, k| self.v[(i, k)] * C64::new(0.0, r * self.lambda[k]).exp());
        let right = DMatrix::from_fn(np, cols, |k, j| C64::new(self.v[(j, k)], 0.0));
        let core = left * right;
        let rot = |k: usize| C64::new(0.0, theta * k as f64).exp();
        Ok(DMatrix::from_fn(n, cols, |i, j| rot(i) * core[(i, j)] * rot(j).conj()))
    }

    /// `D(γ)` on the first `n` levels.
    pub fn displacement(&self, gamma: C64) -> Result<CMat<f64>> {
        self.block(gamma, self.n)
    }

    /// `W(α) = 2 Tr(e^{iπn} D†(α/√2) ρ D(α/√2))`.
    pub fn wigner(&self, rho: &CMat<f64>, alpha: C64) -> Result<f64> {
        Ok(self.wigner_complex(rho, alpha)?.re)
    }

    /// Complex `2 Tr(e^{iπn} D†(α/√2) X D(α/√2))` for a non-Hermitian operator.
    ///
    /// The displaced operator leaves the first `n` levels, so the parity trace
    /// runs over the whole padded space.
    pub fn wigner_complex(&self, x: &CMat<f64>, alpha: C64) -> Result<C64> {
        let dm = self.block(alpha / std::f64::consts::SQRT_2, self.v.nrows())?;
        let xd = x * &dm;
        let mut w = ZERO;
        for k in 0..dm.ncols() {
            let yk: C64 = (0..self.n).map(|i| dm[(i, k)].conj() * xd[(i, k)]).sum();
            w += if k % 2 == 0 { yk } else { -yk };
        }
        Ok(w * 2.0)
    }

    /// `Λ(η) = Tr(D†(√2η) ρ)`.
    pub fn characteristic(&self, rho: &CMat<f64>, eta: C64) -> Result<C64> {
        let dm = self.displacement(-eta * std::f64::consts::SQRT_2)?;
        Ok((&dm * rho).trace())
    }
}

fn single_mode(rho: &DensityMatrix) -> Result<usize> {
    if rho.dims.len() != 1 {
        return Err(Error::Shape("phase-space functions need a single-mode state".into()));
    }
    Ok(rho.dims[0])
}

/// Numeric Wigner function of a single-mode state.
pub fn wigner_numeric(rho: &DensityMatrix, alpha: C64) -> Result<f64> {
    let n = single_mode(rho)?;
    DisplacementOracle::new(n, alpha.norm() / std::f64::consts::SQRT_2)?.wigner(&rho.rho, alpha)
}

/// Numeric characteristic function of a single-mode state.
pub fn characteristic_numeric(rho: &DensityMatrix, eta: C64) -> Result<C64> {
    let n = single_mode(rho)?;
    DisplacementOracle::new(n, eta.norm() * std::f64::consts::SQRT_2)?.characteristic(&rho.rho, eta)
}

/// Classical and quantum ladder superoperators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ladder {
    /// `{a, ρ}/√2`
    Cl,
    /// `[a, ρ]/√2`
    Q,
    /// `{a†, ρ}/√2`
    ClDag,
    /// `[a†, ρ]/√2`
    QDag,
}

/// Largest relative weight tolerated in the top two Fock levels before a
/// ladder superoperator is applied.
pub const HEADROOM_TOL: f64 = 1e-12;

/// Applies a ladder superoperator of `mode` to the operator `x` on the
/// product space `dims`.
pub fn apply_superoperator_ladder(x: &CMat<f64>, dims: &[usize], kind: Ladder, mode: usize) -> Result<CMat<f64>> {
    let a = boson_annihilator(dims, mode)?;
    let d = a.nrows();
    if x.shape() != (d, d) {
        return Err(Error::Shape(format!("expected {0}×{0} operator", d)));
    }
    let scale_x = x.camax();
    let n = dims[mode];
    let mut edge: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            if occupations(dims, i)[mode] + 2 >= n || occupations(dims, j)[mode] + 2 >= n {
                edge = edge.max(x[(i, j)].norm());
            }
        }
    }
    if scale_x > 0.0 && edge > HEADROOM_TOL * scale_x {
        return Err(Error::Headroom(edge / scale_x));
    }
    let op = match kind {
        Ladder::Cl | Ladder::Q => a,
        Ladder::ClDag | Ladder::QDag => adjoint(&a),
    };
    let left = &op * x;
    let right = right_mul(x, &op);
    let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    Ok(match kind {
        Ladder::Cl | Ladder::ClDag => (left + right) * s,
        Ladder::Q | Ladder::QDag => (left - right) * s,
    })
}

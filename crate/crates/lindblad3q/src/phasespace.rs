//! Phase-space layer: Wigner/characteristic conventions, the Fourier pair,
//! Gaussian convolution, Laguerre eigenfunctions and the damped-oscillator
//! propagators.
//!
//! With `√2`-scaled variables the Wigner function of `ρ` is
//! `W(α) = 2 Tr(e^{iπn} D†(α/√2) ρ D(α/√2))` and the characteristic function is
//! `Λ(η) = Tr(D†(√2η) ρ)`, normalized so that `∫ d²α/(2π) W = Λ(0) = 1`.

use crate::special::{laguerre, sqrt_factorial_ratio};
use crate::{ci, cplx, creal, czero, lit, to_f64, Complex, Error, Real, Result};
use nalgebra::ComplexField;
use rayon::prelude::*;
use std::io::{BufRead, Write};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DampedOscillatorParams<T: Real> {
    pub omega0: T,
    pub kappa: T,
    pub nth: T,
}

impl<T: Real> DampedOscillatorParams<T> {
    pub fn new(omega0: T, kappa: T, nth: T) -> Result<Self> {
        if !(kappa >= T::zero()) || !(nth >= T::zero()) {
            return Err(Error::InvalidParameter("kappa and nth must be non-negative".into()));
        }
        Ok(Self { omega0, kappa, nth })
    }

    /// `2 n̄ + 1`.
    pub fn width(&self) -> T {
        lit::<T>(2.0) * self.nth + T::one()
    }
}

/// `K(η, α; t) = exp(−(2n̄+1)(1−e^{−κt})|η|² + e^{−κt/2}(η*α e^{−iω0t} − c.c.))`.
pub fn damped_kernel<T: Real>(p: &DampedOscillatorParams<T>, eta: Complex<T>, alpha: Complex<T>, t: T) -> Complex<T> {
    let v = p.width() * (T::one() - (-p.kappa * t).exp());
    let g = cplx(-p.kappa * t / lit(2.0), -p.omega0 * t).exp();
    let x = eta.conj() * alpha * g;
    (x - x.conj() - creal(v * eta.norm_sqr())).exp()
}

/// Classical-classical propagator `Ξ(β, α; t) = (2/v) exp(−|β − gα|²/v)`
/// with `v = (2n̄+1)(1−e^{−κt})`, `g = e^{(−iω0−κ/2)t}`.
pub fn damped_wigner_propagator<T: Real>(p: &DampedOscillatorParams<T>, beta: Complex<T>, alpha: Complex<T>, t: T) -> Result<T> {
    if !(t >= T::zero()) {
        return Err(Error::InvalidParameter("t must be non-negative".into()));
    }
    let v = p.width() * (T::one() - (-p.kappa * t).exp());
    if !(v > T::default_epsilon()) {
        return Err(Error::DeltaDistribution);
    }
    let g = cplx(-p.kappa * t / lit(2.0), -p.omega0 * t).exp();
    Ok(lit::<T>(2.0) / v * (-(beta - g * alpha).norm_sqr() / v).exp())
}

/// Wigner function of a coherent state centred at `alpha0`: `2 e^{−|α−α0|²}`.
pub fn coherent_wigner<T: Real>(alpha0: Complex<T>, alpha: Complex<T>) -> T {
    lit::<T>(2.0) * (-(alpha - alpha0).norm_sqr()).exp()
}

/// Thermal Wigner function `2 e^{−|α|²/s}/s`, `s = 2n̄+1`.
pub fn thermal_wigner<T: Real>(nth: T, alpha: Complex<T>) -> T {
    let s = lit::<T>(2.0) * nth + T::one();
    lit::<T>(2.0) / s * (-alpha.norm_sqr() / s).exp()
}

/// `√(min!/max!) · |α|^{|μ−ν|} e^{∓iφ|μ−ν|} L^{|μ−ν|}_{min}(|α|²/s)` shared by both eigenfunctions.
fn laguerre_core<T: Real>(mu: u32, nu: u32, s: T, alpha: Complex<T>) -> Complex<T> {
    let lo = mu.min(nu);
    let hi = mu.max(nu);
    let d = hi - lo;
    let phase = if mu >= nu { alpha.conj() } else { alpha };
    let pw = if d == 0 { crate::cone() } else { phase.powi(d as i32) };
    pw * creal(sqrt_factorial_ratio::<T>(lo, hi) * laguerre(lo, d, alpha.norm_sqr() / s))
}

/// Right eigenfunction `W_{r_{μν}}(α)` of the damped-oscillator Liouvillian:
/// `√(min!/max!) · 2(−1)^{min} e^{−|α|²/s}/s^{max+1} · e^{−iφ(μ−ν)} |α|^{|μ−ν|} L^{|μ−ν|}_{min}(|α|²/s)`.
pub fn right_eigvec_wigner<T: Real>(mu: u32, nu: u32, nth: T, alpha: Complex<T>) -> Complex<T> {
    let s = lit::<T>(2.0) * nth + T::one();
    let lo = mu.min(nu);
    let hi = mu.max(nu);
    let sign = if lo.is_multiple_of(2) { T::one() } else { -T::one() };
    let pref = lit::<T>(2.0) * sign * (-alpha.norm_sqr() / s).exp() / s.powi(hi as i32 + 1);
    laguerre_core(mu, nu, s, alpha) * creal(pref)
}

/// Left eigenfunction as a phase-space function, `W_{l_{μν}}(α) = ⟨⟨α_cl|l_{μν}⟩⟩`:
/// `√(min!/max!) (−1)^{min} s^{min} e^{−iφ(μ−ν)} |α|^{|μ−ν|} L^{|μ−ν|}_{min}(|α|²/s)`.
///
/// Bi-orthonormality reads `∫ d²α/(2π) conj(W_{l_{μ'ν'}}) W_{r_{μν}} = δ_{μμ'} δ_{νν'}`.
pub fn left_eigvec_phase<T: Real>(mu: u32, nu: u32, nth: T, alpha: Complex<T>) -> Complex<T> {
    let s = lit::<T>(2.0) * nth + T::one();
    let lo = mu.min(nu);
    let sign = if lo.is_multiple_of(2) { T::one() } else { -T::one() };
    laguerre_core(mu, nu, s, alpha) * creal(sign * s.powi(lo as i32))
}

/// `W_{|μ⟩⟨μ|}(α) = 2(−1)^μ e^{−|α|²} L_μ(2|α|²)`.
pub fn wigner_of_fock_diagonal<T: Real>(mu: u32, alpha: Complex<T>) -> T {
    let r2 = alpha.norm_sqr();
    let sign = if mu.is_multiple_of(2) { T::one() } else { -T::one() };
    lit::<T>(2.0) * sign * (-r2).exp() * laguerre(mu, 0, lit::<T>(2.0) * r2)
}

/// Complex samples on a rectangular grid of the √2-scaled phase-space variable.
///
/// Values are stored row by row with the imaginary coordinate outermost.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseGrid<T: Real> {
    pub re0: T,
    pub im0: T,
    pub d_re: T,
    pub d_im: T,
    pub n_re: usize,
    pub n_im: usize,
    pub values: Vec<Complex<T>>,
}

/// Default grid: 161 × 161 samples over `[−6, 6]²`.
pub const DEFAULT_EXTENT: f64 = 6.0;
pub const DEFAULT_RESOLUTION: usize = 161;

impl<T: Real> PhaseGrid<T> {
    /// Square grid over `[−extent, extent]²` with `resolution` samples per axis.
    pub fn square(extent: T, resolution: usize) -> Result<Self> {
        if resolution < 2 || !(extent > T::zero()) {
            return Err(Error::InvalidParameter("grid needs extent > 0 and resolution ≥ 2".into()));
        }
        let d = lit::<T>(2.0) * extent / lit::<T>((resolution - 1) as f64);
        Ok(Self { re0: -extent, im0: -extent, d_re: d, d_im: d, n_re: resolution, n_im: resolution, values: vec![czero(); resolution * resolution] })
    }

    pub fn default_grid() -> Self {
        Self::square(lit(DEFAULT_EXTENT), DEFAULT_RESOLUTION).expect("valid default")
    }

    /// Same geometry, values from `f(α)`, evaluated in parallel.
    pub fn map_points<F>(&self, f: F) -> Self
    where
        F: Fn(Complex<T>) -> Complex<T> + Sync,
    {
        let values = (0..self.len()).into_par_iter().map(|k| f(self.point(k))).collect();
        Self { values, ..self.clone() }
    }

    pub fn try_map_points<F>(&self, f: F) -> Result<Self>
    where
        F: Fn(Complex<T>) -> Result<Complex<T>> + Sync,
    {
        let values = (0..self.len()).into_par_iter().map(|k| f(self.point(k))).collect::<Result<Vec<_>>>()?;
        Ok(Self { values, ..self.clone() })
    }

    pub fn len(&self) -> usize {
        self.n_re * self.n_im
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn re_coord(&self, i: usize) -> T {
        self.re0 + self.d_re * lit::<T>(i as f64)
    }

    pub fn im_coord(&self, j: usize) -> T {
        self.im0 + self.d_im * lit::<T>(j as f64)
    }

    /// Phase-space point of flat index `k`.
    pub fn point(&self, k: usize) -> Complex<T> {
        cplx(self.re_coord(k % self.n_re), self.im_coord(k / self.n_re))
    }

    pub fn cell_area(&self) -> T {
        self.d_re * self.d_im
    }

    /// `Σ values · dRe · dIm`.
    pub fn integrate(&self) -> Complex<T> {
        let mut acc = czero::<T>();
        for v in &self.values {
            acc += *v;
        }
        acc * creal(self.cell_area())
    }

    /// `∫ d²α/(2π) W`, which is 1 for a Wigner function of a unit-trace state.
    pub fn normalization(&self) -> Complex<T> {
        self.integrate() / creal(lit::<T>(2.0) * T::pi())
    }

    /// Largest magnitude on the grid boundary, a proxy for truncation/aliasing error.
    pub fn boundary_max(&self) -> T {
        let mut m = T::zero();
        for j in 0..self.n_im {
            for i in 0..self.n_re {
                if i == 0 || j == 0 || i + 1 == self.n_re || j + 1 == self.n_im {
                    m = m.max(self.values[j * self.n_re + i].modulus());
                }
            }
        }
        m
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        if self.n_re != other.n_re || self.n_im != other.n_im {
            return Err(Error::Shape("grids differ in size".into()));
        }
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (*a - *b).modulus()).fold(T::zero(), |a, b| a.max(b)))
    }

    /// CSV with `#` header lines (spacing, convention, caller metadata) and
    /// columns `re_alpha,im_alpha,re_value,im_value`.
    pub fn write_csv<W: Write>(&self, w: W, metadata: &[(String, String)]) -> Result<()> {
        let mut w = std::io::BufWriter::new(w);
        writeln!(w, "# convention: sqrt2-scaled alpha")?;
        writeln!(w, "# n_re: {}", self.n_re)?;
        writeln!(w, "# n_im: {}", self.n_im)?;
        writeln!(w, "# d_re: {:e}", to_f64(self.d_re))?;
        writeln!(w, "# d_im: {:e}", to_f64(self.d_im))?;
        for (k, v) in metadata {
            writeln!(w, "# {k}: {v}")?;
        }
        let mut cw = csv::Writer::from_writer(w);
        cw.write_record(["re_alpha", "im_alpha", "re_value", "im_value"])?;
        for k in 0..self.len() {
            let a = self.point(k);
            let v = self.values[k];
            cw.write_record(&[
                format!("{:e}", to_f64(a.re)),
                format!("{:e}", to_f64(a.im)),
                format!("{:e}", to_f64(v.re)),
                format!("{:e}", to_f64(v.im)),
            ])?;
        }
        cw.flush()?;
        Ok(())
    }

    /// Reads a grid written by [`PhaseGrid::write_csv`].
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r);
        let mut pts: Vec<(f64, f64, f64, f64)> = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let f = |i: usize| -> Result<f64> {
                rec.get(i).ok_or_else(|| Error::Parse("short CSV row".into()))?.trim().parse::<f64>().map_err(|e| Error::Parse(e.to_string()))
            };
            pts.push((f(0)?, f(1)?, f(2)?, f(3)?));
        }
        if pts.len() < 4 {
            return Err(Error::Parse("grid CSV needs at least 2x2 samples".into()));
        }
        let n_re = pts.iter().take_while(|p| p.1 == pts[0].1).count();
        if n_re < 2 || !pts.len().is_multiple_of(n_re) {
            return Err(Error::Parse("grid CSV is not rectangular".into()));
        }
        let n_im = pts.len() / n_re;
        let d_re = pts[1].0 - pts[0].0;
        let d_im = pts[n_re].1 - pts[0].1;
        Ok(Self {
            re0: lit(pts[0].0),
            im0: lit(pts[0].1),
            d_re: lit(d_re),
            d_im: lit(d_im),
            n_re,
            n_im,
            values: pts.iter().map(|p| cplx(lit(p.2), lit(p.3))).collect(),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FourierDirection {
    /// `Λ(η) = ∫ d²α/(2π) e^{η*α − ηα*} W(α)`.
    WignerToCharacteristic,
    /// `W(α) = ∫ 2d²η/π e^{ηα* − η*α} Λ(η)`.
    CharacteristicToWigner,
}

#[derive(Clone, Debug)]
pub struct FourierOutput<T: Real> {
    /// Transform sampled on the input grid's coordinates.
    pub grid: PhaseGrid<T>,
    /// Largest boundary magnitude of the input, relative to its maximum.
    pub input_boundary: T,
    /// Set when `input_boundary` exceeds [`ALIASING_THRESHOLD`].
    pub aliasing_warning: bool,
}

pub const ALIASING_THRESHOLD: f64 = 1e-6;

/// Direct quadrature of the Wigner/characteristic Fourier pair on the input grid.
///
/// The kernel factorizes, `e^{η*α − ηα*} = e^{2i η_r α_i} e^{−2i η_i α_r}`, so the
/// double sum is evaluated as two one-dimensional passes.
pub fn fourier_wigner_characteristic<T: Real>(grid: &PhaseGrid<T>, direction: FourierDirection) -> FourierOutput<T> {
    // With input x and output y both directions carry e^{y*x − yx*}; only the weight differs.
    let weight = match direction {
        FourierDirection::WignerToCharacteristic => T::one() / (lit::<T>(2.0) * T::pi()),
        FourierDirection::CharacteristicToWigner => lit::<T>(2.0) / T::pi(),
    };
    let two = lit::<T>(2.0);
    let (nr, ni) = (grid.n_re, grid.n_im);
    // First pass over the real input coordinate: T[j_out_im][j_in_im] for output Im index.
    let first: Vec<Vec<Complex<T>>> = (0..ni)
        .into_par_iter()
        .map(|jo| {
            let eta_i = grid.im_coord(jo);
            (0..ni)
                .map(|ja| {
                    let mut acc = czero::<T>();
                    for ia in 0..nr {
                        let ar = grid.re_coord(ia);
                        acc += grid.values[ja * nr + ia] * cplx(T::zero(), -two * eta_i * ar).exp();
                    }
                    acc
                })
                .collect()
        })
        .collect();
    let scale = creal(weight * grid.cell_area());
    let values: Vec<Complex<T>> = (0..nr * ni)
        .into_par_iter()
        .map(|k| {
            let io = k % nr;
            let jo = k / nr;
            let eta_r = grid.re_coord(io);
            let mut acc = czero::<T>();
            for ja in 0..ni {
                let ai = grid.im_coord(ja);
                acc += first[jo][ja] * cplx(T::zero(), two * eta_r * ai).exp();
            }
            acc * scale
        })
        .collect();
    let peak = grid.values.iter().map(|v| v.modulus()).fold(T::zero(), |a, b| a.max(b));
    let input_boundary = if peak > T::zero() { grid.boundary_max() / peak } else { T::zero() };
    FourierOutput {
        grid: PhaseGrid { values, ..grid.clone() },
        input_boundary,
        aliasing_warning: input_boundary > lit(ALIASING_THRESHOLD),
    }
}

/// `W_out(α) = ∫ d²β/(wπ) e^{−|α−β|²/w} W_in(β)` by separable grid quadrature.
pub fn gaussian_convolve<T: Real>(grid: &PhaseGrid<T>, width: T) -> Result<PhaseGrid<T>> {
    if !(width > T::zero()) {
        return Err(Error::InvalidParameter("convolution width must be positive".into()));
    }
    let (nr, ni) = (grid.n_re, grid.n_im);
    let kr: Vec<T> = (0..nr).map(|d| (-(grid.d_re * lit::<T>(d as f64)).powi(2) / width).exp()).collect();
    let ki: Vec<T> = (0..ni).map(|d| (-(grid.d_im * lit::<T>(d as f64)).powi(2) / width).exp()).collect();
    let mut pass = vec![czero::<T>(); nr * ni];
    pass.par_chunks_mut(nr).enumerate().for_each(|(j, row)| {
        for (i, out) in row.iter_mut().enumerate() {
            let mut acc = czero::<T>();
            for i2 in 0..nr {
                acc += grid.values[j * nr + i2] * creal(kr[i.abs_diff(i2)]);
            }
            *out = acc;
        }
    });
    let scale = creal(grid.cell_area() / (width * T::pi()));
    let values: Vec<Complex<T>> = (0..nr * ni)
        .into_par_iter()
        .map(|k| {
            let i = k % nr;
            let j = k / nr;
            let mut acc = czero::<T>();
            for j2 in 0..ni {
                acc += pass[j2 * nr + i] * creal(ki[j.abs_diff(j2)]);
            }
            acc * scale
        })
        .collect();
    Ok(PhaseGrid { values, ..grid.clone() })
}

/// Phase-space Fokker–Planck generator of the damped oscillator applied to `W`
/// by central differences: returns `(L W)(α)` in the `i∂tW = L W` convention.
///
/// `∂tW = [ (κ/2 + iω0) ∂_α α + (κ/2 − iω0) ∂_{α*} α* + κ(2n̄+1) ∂_α ∂_{α*} ] W`.
pub fn fokker_planck_apply<T: Real, F>(p: &DampedOscillatorParams<T>, w: F, alpha: Complex<T>, h: T) -> Complex<T>
where
    F: Fn(Complex<T>) -> Complex<T>,
{
    let two = lit::<T>(2.0);
    let hx = cplx(h, T::zero());
    let hy = cplx(T::zero(), h);
    let g = |z: Complex<T>| w(z);
    // Wirtinger derivatives ∂_α = (∂x − i∂y)/2, ∂_{α*} = (∂x + i∂y)/2.
    let dx = |f: &dyn Fn(Complex<T>) -> Complex<T>, z: Complex<T>| (f(z + hx) - f(z - hx)) / creal(two * h);
    let dy = |f: &dyn Fn(Complex<T>) -> Complex<T>, z: Complex<T>| (f(z + hy) - f(z - hy)) / creal(two * h);
    let f_a = |z: Complex<T>| z * g(z);
    let f_ac = |z: Complex<T>| z.conj() * g(z);
    let half = creal(lit::<T>(0.5));
    let d_alpha_aw = (dx(&f_a, alpha) - ci::<T>() * dy(&f_a, alpha)) * half;
    let d_alphac_acw = (dx(&f_ac, alpha) + ci::<T>() * dy(&f_ac, alpha)) * half;
    let lap = (g(alpha + hx) + g(alpha - hx) + g(alpha + hy) + g(alpha - hy) - g(alpha) * creal(lit::<T>(4.0))) / creal(h * h);
    let k2 = p.kappa / two;
    let dtw = cplx(k2, p.omega0) * d_alpha_aw + cplx(k2, -p.omega0) * d_alphac_acw + lap * creal(p.kappa * p.width() / lit(4.0));
    dtw * ci::<T>()
}

use crate::args::{Check, Options};
use crate::commands::{covariance_trajectory, grid, series, single_mode_params, times_or};
use crate::io::*;
use lindblad3q::kerr::kerr_wigner_coherent;
use lindblad3q::model::Statistics;
use lindblad3q::oracle::*;
use lindblad3q::phasespace::{coherent_wigner, PhaseGrid};
use lindblad3q::thirdq_boson::{enumerate_spectrum, gaussian_kernel, solve_steady_covariance, spectral_data, third_quantize, DEFAULT_SPECTRUM_CAP};
use lindblad3q::thirdq_fermion::{fermion_spectral_data, fermion_spectrum, solve_steady_covariance_fermion, third_quantize_fermion};
use lindblad3q::{CMat64, Complex64, Spec64};
use rayon::prelude::*;
use serde_json::{json, Value};
use std::f64::consts::{PI, SQRT_2};

/// Largest oracle Hilbert space the command will build.
const MAX_ORACLE_DIM: usize = 4096;

fn limits(dim: usize) -> Outcome<OracleLimits> {
    if dim > MAX_ORACLE_DIM {
        return Err(lindblad3q::Error::OracleCap { dim, cap: MAX_ORACLE_DIM }.into());
    }
    let d = OracleLimits::default();
    Ok(OracleLimits { max_dim: d.max_dim.max(dim), ..d })
}

fn boson_oracle(spec: &Spec64, opts: &Options, default_cutoff: usize) -> Outcome<(FockLiouvillian, usize)> {
    let m = spec.modes();
    let nc = opts.cutoff.unwrap_or(default_cutoff);
    let dims = vec![nc; m];
    let dim = nc.checked_pow(m as u32).unwrap_or(usize::MAX);
    Ok((build_boson_liouvillian(spec, &dims, limits(dim)?)?, nc))
}

/// Cutoff per mode keeping the zero-charge sector below ~1200 states, about a minute of dense work.
fn default_cutoff(m: usize) -> usize {
    match m {
        1 => 30,
        2 => 10,
        3 => 4,
        _ => 3,
    }
}

fn nearest(z: Complex64, set: &[Complex64]) -> f64 {
    set.iter().map(|w| (z - w).norm()).fold(f64::INFINITY, f64::min)
}

fn hausdorff(a: &[Complex64], b: &[Complex64]) -> f64 {
    let ab = a.iter().map(|z| nearest(*z, b)).fold(0.0, f64::max);
    let ba = b.iter().map(|z| nearest(*z, a)).fold(0.0, f64::max);
    ab.max(ba)
}

/// Bosons: every zero-charge analytic eigenvalue up to `--excitations` must appear in
/// the oracle's zero-charge sector. Fermions: the full sets must coincide.
fn spectrum(opts: &Options, meta: &mut Meta) -> Outcome<(f64, Value)> {
    let q = load_quadratic(opts)?;
    *meta = Meta::new("oracle-check spectrum", &q.hash);
    let spec = &q.model;
    match spec.statistics {
        Statistics::Boson => {
            let sd = spectral_data(&third_quantize(spec)?)?;
            let analytic: Vec<Complex64> = enumerate_spectrum(sd.e.as_slice(), opts.excitations)?
                .iter()
                .filter(|e| e.index.mu.iter().sum::<u32>() == e.index.nu.iter().sum::<u32>())
                .map(|e| e.value)
                .collect();
            let (l, nc) = boson_oracle(spec, opts, default_cutoff(spec.modes()))?;
            let oracle = l.sector_eigenvalues(0)?;
            let err = analytic.iter().map(|z| nearest(*z, &oracle)).fold(0.0, f64::max);
            meta.push("cutoff", nc).push("max_excitations", opts.excitations);
            Ok((err, json!({"compared": analytic.len(), "oracle_sector_size": oracle.len(), "measure": "max distance to nearest oracle eigenvalue"})))
        }
        Statistics::Fermion => {
            let sd = fermion_spectral_data(&third_quantize_fermion(spec)?)?;
            let analytic: Vec<Complex64> = fermion_spectrum(sd.e.as_slice(), DEFAULT_SPECTRUM_CAP)?.iter().map(|e| e.value).collect();
            let l = build_fermion_liouvillian(spec, limits(1 << spec.modes())?)?;
            let oracle = l.eigenvalues()?;
            let err = hausdorff(&analytic, &oracle);
            Ok((err, json!({"compared": analytic.len(), "oracle_count": oracle.len(), "measure": "Hausdorff distance"})))
        }
    }
}

fn initial_density(spec: &Spec64, nc: usize) -> Outcome<DensityMatrix> {
    let m = spec.modes();
    Ok(match spec.statistics {
        Statistics::Boson => {
            let vac = fock_state(0, nc)?;
            (1..m).fold(vac.clone(), |acc, _| acc.tensor(&vac))
        }
        Statistics::Fermion => {
            let d = 1usize << m;
            DensityMatrix::new(vec![2; m], CMat64::identity(d, d) * Complex64::new(1.0 / d as f64, 0.0))?
        }
    })
}

/// Steady state and trajectory from the vacuum (bosons) or fully mixed state (fermions).
fn covariance(opts: &Options, meta: &mut Meta) -> Outcome<(f64, Value)> {
    let q = load_quadratic(opts)?;
    *meta = Meta::new("oracle-check covariance", &q.hash);
    let spec = &q.model;
    let ts = times_or(opts, &[0.1, 1.0, 5.0]);
    let (_, initial, traj) = covariance_trajectory(spec, &ts)?;
    let (l, analytic_ss, nc) = match spec.statistics {
        Statistics::Boson => {
            let (l, nc) = boson_oracle(spec, opts, default_cutoff(spec.modes()))?;
            (l, solve_steady_covariance(&third_quantize(spec)?)?, nc)
        }
        Statistics::Fermion => {
            let l = build_fermion_liouvillian(spec, limits(1 << spec.modes())?)?;
            (l, solve_steady_covariance_fermion(&third_quantize_fermion(spec)?)?, 2)
        }
    };
    let cov = |rho: &DensityMatrix| match spec.statistics {
        Statistics::Boson => boson_covariance(rho),
        Statistics::Fermion => fermion_covariance(rho),
    };
    let rho0 = initial_density(spec, nc)?;
    let rhos = l.evolve_trajectory(&rho0, &ts)?;
    let mut per_time = Vec::new();
    let mut worst: f64 = 0.0;
    for ((t, a), rho) in ts.iter().zip(&traj).zip(&rhos) {
        let e = (a - cov(rho)?).camax();
        worst = worst.max(e);
        per_time.push(json!({"t": t, "max_abs_err": e}));
    }
    let ss = (analytic_ss - cov(&l.steady_state()?)?).camax();
    worst = worst.max(ss);
    if spec.statistics == Statistics::Boson {
        meta.push("cutoff", nc);
    }
    Ok((worst, json!({"initial_state": initial, "steady_state_err": ss, "trajectory": per_time})))
}

/// Fixed probe points `(η, α0)` of the kernel check.
const KERNEL_POINTS: [([f64; 2], [f64; 2]); 3] = [([1.0, 0.0], [1.0, 0.0]), ([0.3, -0.5], [-0.8, 0.4]), ([-0.6, 0.2], [0.5, 0.9])];

/// `∫ d²α/(2π) K(η, α; t) W_coh(α)` against the oracle characteristic function of the evolved coherent state.
fn kernel(opts: &Options, meta: &mut Meta) -> Outcome<(f64, Value)> {
    let q = load_quadratic(opts)?;
    *meta = Meta::new("oracle-check kernel", &q.hash);
    single_mode_params(&q.model)?;
    let tq = third_quantize(&q.model)?;
    let ts = times_or(opts, &[1.0]);
    let (l, nc) = boson_oracle(&q.model, opts, 40)?;
    meta.push("cutoff", nc).push("quadrature", "201 x 201 trapezoid on alpha0 + [-7, 7]^2");
    let (half, n) = (7.0, 201usize);
    let h = 2.0 * half / (n - 1) as f64;
    let mut worst: f64 = 0.0;
    let mut rows = Vec::new();
    for &t in &ts {
        for (e, a) in KERNEL_POINTS {
            let (eta, a0) = (Complex64::new(e[0], e[1]), Complex64::new(a[0], a[1]));
            let rho = l.evolve_density(&coherent_state(a0 / SQRT_2, nc)?, t)?;
            let want = characteristic_numeric(&rho, eta)?;
            let got = (0..n * n)
                .into_par_iter()
                .map(|k| {
                    let al = a0 + Complex64::new(-half + (k % n) as f64 * h, -half + (k / n) as f64 * h);
                    gaussian_kernel(&tq, &[eta], &[al], t).map(|v| v * coherent_wigner(a0, al))
                })
                .collect::<Result<Vec<_>, _>>()?
                .into_iter()
                .sum::<Complex64>()
                * (h * h / (2.0 * PI));
            let err = (got - want).norm();
            worst = worst.max(err);
            rows.push(json!({"t": t, "eta": complex_json(eta), "alpha0": complex_json(a0), "analytic": complex_json(got), "oracle": complex_json(want), "abs_err": err}));
        }
    }
    Ok((worst, json!({"points": rows})))
}

/// Kerr Wigner series against the displaced-parity trace of the evolved oracle state.
fn wigner(opts: &Options, meta: &mut Meta) -> Outcome<(f64, Value)> {
    let (k, panels) = load_kerr(opts)?;
    *meta = Meta::new("oracle-check wigner", &k.hash);
    let ctrl = series(opts)?;
    let g: PhaseGrid<f64> = grid(opts, (4.0, 41))?;
    let nc = opts.cutoff.unwrap_or(60);
    let extent = (-g.re0).max(-g.im0).max(g.re0 + g.d_re * (g.n_re - 1) as f64).max(g.im0 + g.d_im * (g.n_im - 1) as f64);
    let dop = DisplacementOracle::new(nc, extent)?;
    meta.push("cutoff", nc).push("lmax", ctrl.l_max).push("term_tol", ctrl.term_tol);
    let ts = times_or(opts, &[PI]);
    let mut worst: f64 = 0.0;
    let mut rows = Vec::new();
    for p in &panels {
        let l = build_kerr_liouvillian(&p.model, nc, limits(nc)?)?;
        let pts: Vec<f64> = p.t.map_or_else(|| ts.clone(), |t| vec![t]);
        let rho0 = coherent_state(p.alpha0 / SQRT_2, nc)?;
        for (t, rho) in pts.iter().zip(l.evolve_trajectory(&rho0, &pts)?) {
            let diffs = (0..g.len())
                .into_par_iter()
                .map(|j| {
                    let a = g.point(j);
                    let s = kerr_wigner_coherent(&p.model, a, p.alpha0, *t, &ctrl)?.value;
                    Ok((s - Complex64::new(dop.wigner(&rho.rho, a)?, 0.0)).norm())
                })
                .collect::<Result<Vec<f64>, lindblad3q::Error>>()?;
            let err = diffs.into_iter().fold(0.0, f64::max);
            worst = worst.max(err);
            rows.push(json!({"panel": p.label, "t": t, "max_abs_err": err}));
        }
    }
    Ok((worst, json!({"panels": rows})))
}

pub fn oracle_check(opts: &Options, which: Check) -> Outcome {
    if !(opts.check_tol > 0.0) {
        return Err(Failure::usage("--check-tol must be positive"));
    }
    let mut meta = Meta::default();
    let (err, details) = match which {
        Check::Spectrum => spectrum(opts, &mut meta)?,
        Check::Covariance => covariance(opts, &mut meta)?,
        Check::Kernel => kernel(opts, &mut meta)?,
        Check::Wigner => wigner(opts, &mut meta)?,
    };
    meta.push("check_tol", opts.check_tol);
    let pass = err <= opts.check_tol;
    let mut sink = Sink::new(&opts.out)?;
    sink.json(
        &format!("oracle_{}.json", which.name()),
        &json!({
            "metadata": meta.to_json(),
            "check": which.name(),
            "max_abs_err": err,
            "tolerance": opts.check_tol,
            "pass": pass,
            "details": details,
        }),
    )?;
    if pass {
        Ok(())
    } else {
        Err(Failure::mismatch(format!("oracle-check {}: max_abs_err {err:e} exceeds tolerance {:e}", which.name(), opts.check_tol)))
    }
}

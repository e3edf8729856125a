use crate::args::{InitialState, Options};
use crate::io::*;
use crate::plot::{self, Heatmap};
use lindblad3q::kerr::*;
use lindblad3q::linalg::hermitian_eigenvalues;
use lindblad3q::model::{Baths, DissipatorMatrices, QuadraticLindbladSpec, Statistics};
use lindblad3q::phasespace::*;
use lindblad3q::thirdq_boson::*;
use lindblad3q::thirdq_fermion::*;
use lindblad3q::{CMat64, Complex64, DampedOscillator64, Error, PhaseGrid64, SeriesControl64, Spec64};
use rayon::prelude::*;
use serde_json::{json, Value};
use std::f64::consts::{PI, SQRT_2};

pub fn series(opts: &Options) -> Outcome<SeriesControl64> {
    Ok(SeriesControl::new(opts.lmax, opts.term_tol)?)
}

pub fn grid(opts: &Options, default: (f64, usize)) -> Outcome<PhaseGrid64> {
    let (e, r) = opts.grid.map_or(default, |g| (g.extent, g.resolution));
    Ok(PhaseGrid64::square(e, r)?)
}

pub fn times(opts: &Options) -> Outcome<Vec<f64>> {
    opts.t.as_ref().map(|t| t.0.clone()).ok_or_else(|| Failure::usage("--t is required"))
}

pub fn times_or(opts: &Options, default: &[f64]) -> Vec<f64> {
    opts.t.as_ref().map_or_else(|| default.to_vec(), |t| t.0.clone())
}

fn spectrum_json(entries: &[SpectrumEntry<f64>]) -> Value {
    Value::Array(entries.iter().map(|e| json!({"mu": e.index.mu, "nu": e.index.nu, "re": e.value.re, "im": e.value.im})).collect())
}

fn with_model(sink: &mut Sink, canonical: &str) -> Outcome {
    sink.text("model.json", canonical)
}

pub fn spectrum(opts: &Options) -> Outcome {
    let q = load_quadratic(opts)?;
    let mut meta = Meta::new("spectrum", &q.hash);
    let (e, entries) = match q.model.statistics {
        Statistics::Boson => {
            let sd = spectral_data(&third_quantize(&q.model)?)?;
            meta.push("max_excitations", opts.excitations);
            let entries = enumerate_spectrum(sd.e.as_slice(), opts.excitations)?;
            (sd.e, entries)
        }
        Statistics::Fermion => {
            let sd = fermion_spectral_data(&third_quantize_fermion(&q.model)?)?;
            let entries = fermion_spectrum(sd.e.as_slice(), DEFAULT_SPECTRUM_CAP)?;
            (sd.e, entries)
        }
    };
    let mut sink = Sink::new(&opts.out)?;
    sink.json(
        "spectrum.json",
        &json!({
            "metadata": meta.to_json(),
            "statistics": q.model.statistics,
            "single_particle": e.iter().map(|z| complex_json(*z)).collect::<Vec<_>>(),
            "spectrum": spectrum_json(&entries),
        }),
    )?;
    with_model(&mut sink, &q.canonical)
}

/// Steady covariance, effective Hamiltonian and noise matrix of either statistics.
struct Steady {
    h_eff: CMat64,
    n: CMat64,
    cov: CMat64,
    name: &'static str,
}

fn steady(spec: &Spec64) -> Outcome<Steady> {
    Ok(match spec.statistics {
        Statistics::Boson => {
            let tq = third_quantize(spec)?;
            let cov = solve_steady_covariance(&tq)?;
            Steady { h_eff: tq.h_eff, n: tq.n, cov, name: "S_mn = <{a_m, a_n^dag}>" }
        }
        Statistics::Fermion => {
            let tq = third_quantize_fermion(spec)?;
            let cov = solve_steady_covariance_fermion(&tq)?;
            Steady { h_eff: tq.h_eff, n: tq.n, cov, name: "A_mn = <[c_m, c_n^dag]>" }
        }
    })
}

pub fn steady_state(opts: &Options) -> Outcome {
    let q = load_quadratic(opts)?;
    let s = steady(&q.model)?;
    let i = Complex64::new(0.0, 1.0);
    let residual = (&s.h_eff * &s.cov - &s.cov * s.h_eff.adjoint() + &s.n * i).norm();
    let meta = Meta::new("steady-state", &q.hash);
    let mut sink = Sink::new(&opts.out)?;
    sink.json(
        "steady_state.json",
        &json!({
            "metadata": meta.to_json(),
            "statistics": q.model.statistics,
            "covariance_definition": s.name,
            "covariance": matrix_json(&s.cov),
            "covariance_eigenvalues": hermitian_eigenvalues(&s.cov),
            "lyapunov_residual": residual,
            "h_eff": matrix_json(&s.h_eff),
            "noise": matrix_json(&s.n),
        }),
    )?;
    with_model(&mut sink, &q.canonical)
}

/// Bosons start in the vacuum (`S = 1`), fermions in the fully mixed state (`A = 0`).
pub fn covariance_trajectory(spec: &Spec64, times: &[f64]) -> Outcome<(CMat64, &'static str, Vec<CMat64>)> {
    let m = spec.modes();
    Ok(match spec.statistics {
        Statistics::Boson => {
            let tq = third_quantize(spec)?;
            let s0 = CMat64::identity(m, m);
            let traj = times.iter().map(|&t| evolve_covariance(&tq, &s0, t)).collect::<Result<Vec<_>, _>>()?;
            (s0, "vacuum", traj)
        }
        Statistics::Fermion => {
            let tq = third_quantize_fermion(spec)?;
            let a0 = CMat64::zeros(m, m);
            let traj = times.iter().map(|&t| evolve_covariance_fermion(&tq, &a0, t)).collect::<Result<Vec<_>, _>>()?;
            (a0, "fully mixed", traj)
        }
    })
}

pub fn covariance_evolve(opts: &Options) -> Outcome {
    let q = load_quadratic(opts)?;
    let ts = times(opts)?;
    let s = steady(&q.model)?;
    let (_, initial, traj) = covariance_trajectory(&q.model, &ts)?;
    let meta = Meta::new("covariance-evolve", &q.hash);
    let points: Vec<Value> = ts.iter().zip(&traj).map(|(t, c)| json!({"t": t, "covariance": matrix_json(c)})).collect();
    let mut sink = Sink::new(&opts.out)?;
    sink.json(
        "covariance.json",
        &json!({
            "metadata": meta.to_json(),
            "statistics": q.model.statistics,
            "covariance_definition": s.name,
            "initial_state": initial,
            "steady": matrix_json(&s.cov),
            "trajectory": points,
        }),
    )?;
    with_model(&mut sink, &q.canonical)
}

/// Single-mode damped-oscillator parameters of a U(1)-symmetric bosonic model.
pub fn single_mode_params(spec: &Spec64) -> Outcome<DampedOscillator64> {
    if spec.statistics != Statistics::Boson || spec.modes() != 1 {
        return Err(Failure::usage("a single bosonic mode is required"));
    }
    let tq = third_quantize(spec)?;
    if !tq.is_u1_symmetric() {
        return Err(Error::U1Breaking("single-mode phase-space propagation").into());
    }
    let e = tq.h_eff[(0, 0)];
    let kappa = -2.0 * e.im;
    if kappa <= 0.0 {
        return Err(Error::Unstable { max_im: e.im }.into());
    }
    let nth = ((tq.n[(0, 0)].re / kappa - 1.0) / 2.0).max(0.0);
    Ok(DampedOscillatorParams::new(e.re, kappa, nth)?)
}

impl InitialState {
    pub fn wigner(&self, alpha: Complex64) -> f64 {
        match *self {
            InitialState::Coherent(a0) => coherent_wigner(a0, alpha),
            InitialState::Thermal(n) => thermal_wigner(n, alpha),
            InitialState::Fock(k) => wigner_of_fock_diagonal(k, alpha),
        }
    }

    /// Shortest length over which the Wigner function changes appreciably.
    fn feature_scale(&self) -> f64 {
        match *self {
            InitialState::Coherent(_) => 1.0,
            InitialState::Thermal(n) => (2.0 * n + 1.0).sqrt(),
            InitialState::Fock(k) => 1.0 / f64::from(k + 1).sqrt(),
        }
    }

    /// Centre and half-width of the square outside which the Wigner function is negligible.
    fn support(&self) -> (Complex64, f64) {
        match *self {
            InitialState::Coherent(a0) => (a0, TAIL),
            InitialState::Thermal(n) => (Complex64::new(0.0, 0.0), TAIL * (2.0 * n + 1.0).sqrt()),
            InitialState::Fock(k) => (Complex64::new(0.0, 0.0), f64::from(2 * k + 1).sqrt() + TAIL),
        }
    }
}

/// Gaussian tails beyond this many widths are dropped.
const TAIL: f64 = 6.5;
/// Quadrature steps per feature width; the trapezoid error is then ~e^{−π²·2.5²}.
const STEPS_PER_WIDTH: f64 = 2.5;
/// Largest node count per output point.
const MAX_NODES: usize = 1 << 20;

/// `W(β, t) = ∫ d²α/(2π) Ξ(β, α; t) W0(α)` by the trapezoid rule in `α`.
///
/// As a function of `α` the propagator is a Gaussian centred at `β/g` of width
/// `√v/|g|`, so the rule covers the overlap of that peak with the support of `W0`
/// at a step resolving the narrower of the two. Returns the grid and the largest
/// node count used for one output point.
pub fn damped_evolve(p: &DampedOscillator64, w0: &InitialState, g: &PhaseGrid64, t: f64) -> Outcome<(PhaseGrid64, usize)> {
    if t == 0.0 {
        return Ok((g.map_points(|a| Complex64::new(w0.wigner(a), 0.0)), 1));
    }
    let v = p.width() * (1.0 - (-p.kappa * t).exp());
    let gf = Complex64::new(-p.kappa * t / 2.0, -p.omega0 * t).exp();
    let w_xi = v.sqrt() / gf.norm();
    let step = w0.feature_scale().min(w_xi) / STEPS_PER_WIDTH;
    let (c0, r0) = w0.support();
    let axis = |centre_xi: f64, centre_w0: f64| {
        let lo = (centre_w0 - r0).max(centre_xi - TAIL * w_xi);
        let hi = (centre_w0 + r0).min(centre_xi + TAIL * w_xi);
        if hi <= lo {
            return None;
        }
        let n = (((hi - lo) / step).ceil() as usize + 1).max(2);
        Some((lo, (hi - lo) / (n - 1) as f64, n))
    };
    let values = (0..g.len())
        .into_par_iter()
        .map(|k| {
            let beta = g.point(k);
            let c = beta / gf;
            let (Some((lr, hr, nr)), Some((li, hi, ni))) = (axis(c.re, c0.re), axis(c.im, c0.im)) else {
                return Ok((Complex64::new(0.0, 0.0), 0));
            };
            if nr * ni > MAX_NODES {
                return Err(Error::Envelope(format!("{nr}x{ni} quadrature nodes needed at t = {t}")));
            }
            let mut acc = 0.0;
            for j in 0..ni {
                for i in 0..nr {
                    let a = Complex64::new(lr + i as f64 * hr, li + j as f64 * hi);
                    acc += damped_wigner_propagator(p, beta, a, t)? * w0.wigner(a);
                }
            }
            Ok((Complex64::new(acc * hr * hi / (2.0 * PI), 0.0), nr * ni))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let nodes = values.iter().map(|v| v.1).max().unwrap_or(0);
    Ok((PhaseGrid64 { values: values.into_iter().map(|v| v.0).collect(), ..g.clone() }, nodes))
}

pub fn wigner_evolve(opts: &Options) -> Outcome {
    let q = load_quadratic(opts)?;
    let p = single_mode_params(&q.model)?;
    let ts = times(opts)?;
    let g = grid(opts, (DEFAULT_EXTENT, DEFAULT_RESOLUTION))?;
    let base = Meta::new("wigner-evolve", &q.hash);
    let mut sink = Sink::new(&opts.out)?;
    let mut panels = Vec::new();
    for (k, &t) in ts.iter().enumerate() {
        let (w, nodes) = damped_evolve(&p, &opts.initial, &g, t)?;
        let meta = base
            .with("initial_state", opts.initial)
            .with("omega0", p.omega0)
            .with("kappa", p.kappa)
            .with("nth", p.nth)
            .with("t", t)
            .with("quadrature_nodes_max", nodes)
            .with("normalization", w.normalization().re)
            .with("boundary_max", w.boundary_max());
        let name = format!("wigner_t{k}.csv");
        sink.grid(&name, &w, &meta)?;
        let range = w.values.iter().map(|z| z.re.abs()).fold(0.0, f64::max);
        panels.push(Heatmap { csv: name, title: format!("t = {t}"), range });
    }
    sink.text("wigner.gp", &plot::heatmaps("wigner.png", "damped oscillator Wigner function", &panels))?;
    with_model(&mut sink, &q.canonical)
}

fn kerr_meta(base: &Meta, p: &Panel) -> Meta {
    base.with("panel", &p.label)
        .with("omega0", p.model.omega0)
        .with("u", p.model.u)
        .with("kappa", p.model.kappa)
        .with("nth", p.model.nth)
        .with("alpha0", format!("{},{}", p.alpha0.re, p.alpha0.im))
}

/// `(index, time)` pairs of a panel: its own fixed time, else every `--t`.
fn panel_times(p: &Panel, opts: &Options) -> Outcome<Vec<(usize, f64)>> {
    match p.t {
        Some(t) => Ok(vec![(0, t)]),
        None => Ok(times(opts)?.into_iter().enumerate().collect()),
    }
}

fn series_meta(meta: &mut Meta, ctrl: &SeriesControl64, vals: &[SeriesValue<f64>]) {
    meta.push("lmax", ctrl.l_max).push("term_tol", ctrl.term_tol);
    meta.push("l_used_max", vals.iter().map(|v| v.l_used).max().unwrap_or(0));
    meta.push("tail_bound_max", vals.iter().map(|v| v.tail_bound).fold(0.0, f64::max));
}

fn grid_of(g: &PhaseGrid64, vals: &[SeriesValue<f64>]) -> PhaseGrid64 {
    PhaseGrid64 { values: vals.iter().map(|v| v.value).collect(), ..g.clone() }
}

fn file_label(label: &str, idx: usize, n: usize) -> String {
    if n == 1 {
        label.to_string()
    } else {
        format!("{label}_t{idx}")
    }
}

pub fn kerr_wigner(opts: &Options) -> Outcome {
    let (k, panels) = load_kerr(opts)?;
    let ctrl = series(opts)?;
    let g = grid(opts, (DEFAULT_EXTENT, DEFAULT_RESOLUTION))?;
    let base = Meta::new("kerr-wigner", &k.hash);
    let mut sink = Sink::new(&opts.out)?;
    let mut maps = Vec::new();
    for p in &panels {
        let pts = panel_times(p, opts)?;
        for &(i, t) in &pts {
            let vals = (0..g.len())
                .into_par_iter()
                .map(|j| kerr_wigner_coherent(&p.model, g.point(j), p.alpha0, t, &ctrl))
                .collect::<Result<Vec<_>, _>>()?;
            let w = grid_of(&g, &vals);
            let mut meta = kerr_meta(&base, p).with("t", t);
            series_meta(&mut meta, &ctrl, &vals);
            meta.push("normalization", w.normalization().re).push("boundary_max", w.boundary_max());
            let name = format!("kerr_wigner_{}.csv", file_label(&p.label, i, pts.len()));
            sink.grid(&name, &w, &meta)?;
            let range = w.values.iter().map(|z| z.re.abs()).fold(0.0, f64::max);
            panels_title(&mut maps, name, p, t, range);
        }
    }
    sink.text("kerr_wigner.gp", &plot::heatmaps("kerr_wigner.png", "Kerr oscillator Wigner function", &maps))?;
    with_model(&mut sink, &k.canonical)
}

fn panels_title(maps: &mut Vec<Heatmap>, csv: String, p: &Panel, t: f64, range: f64) {
    let title = format!("{}: κ = {}, n̄ = {}, Ut = {:.4}", p.label, p.model.kappa, p.model.nth, p.model.u * t);
    maps.push(Heatmap { csv, title, range });
}

pub fn kerr_average(opts: &Options) -> Outcome {
    let (k, panels) = load_kerr(opts)?;
    let base = Meta::new("kerr-average", &k.hash);
    let ts = match (&opts.t, k.model.u) {
        (Some(t), _) => t.0.clone(),
        (None, u) if u != 0.0 => (0..=400).map(|j| 4.0 * PI / u.abs() * j as f64 / 400.0).collect(),
        _ => return Err(Failure::usage("--t is required when U = 0")),
    };
    let mut sink = Sink::new(&opts.out)?;
    let mut curves = Vec::new();
    for p in &panels {
        if p.alpha0.norm() == 0.0 {
            return Err(Failure::usage(format!("panel `{}`: the scaled amplitude needs alpha0 ≠ 0", p.label)));
        }
        let a0 = kerr_average_a(&p.model, p.alpha0, 0.0)?.norm();
        let mut body = kerr_meta(&base, p).header();
        body += "t,Ut,re,im,abs,scaled\n";
        for &t in &ts {
            let a = kerr_average_a(&p.model, p.alpha0, t)?;
            body += &format!("{:e},{:e},{:e},{:e},{:e},{:e}\n", t, p.model.u * t, a.re, a.im, a.norm(), a.norm() / a0);
        }
        let name = format!("kerr_average_{}.csv", p.label);
        sink.text(&name, &body)?;
        let label = format!("{}: n̄ = {}, |α0| = {:.3}", p.label, p.model.nth, p.alpha0.norm());
        curves.push((name, label));
    }
    sink.text("kerr_average.gp", &plot::revival_lines("kerr_average.png", &curves))?;
    with_model(&mut sink, &k.canonical)
}

pub fn kerr_propagate(opts: &Options) -> Outcome {
    let (k, panels) = load_kerr(opts)?;
    let ctrl = series(opts)?;
    let g = grid(opts, (DEFAULT_EXTENT, 81))?;
    let base = Meta::new("kerr-propagate", &k.hash);
    let mut sink = Sink::new(&opts.out)?;
    let mut maps = Vec::new();
    for p in &panels {
        let g0 = g.map_points(|a| Complex64::new(coherent_wigner(p.alpha0, a), 0.0));
        let pts = panel_times(p, opts)?;
        for &(i, t) in &pts {
            let w = if t == 0.0 { g0.clone() } else { evolve_wigner_grid(&p.model, &g0, t, &ctrl)? };
            let meta = kerr_meta(&base, p)
                .with("t", t)
                .with("initial_state", "coherent")
                .with("lmax", ctrl.l_max)
                .with("term_tol", ctrl.term_tol)
                .with("normalization", w.normalization().re)
                .with("boundary_max", w.boundary_max());
            let name = format!("kerr_propagate_{}.csv", file_label(&p.label, i, pts.len()));
            sink.grid(&name, &w, &meta)?;
            let range = w.values.iter().map(|z| z.re.abs()).fold(0.0, f64::max);
            panels_title(&mut maps, name, p, t, range);
        }
    }
    sink.text("kerr_propagate.gp", &plot::heatmaps("kerr_propagate.png", "Kerr oscillator, propagated grid", &maps))?;
    with_model(&mut sink, &k.canonical)
}

fn panel(label: &str, kappa: Option<f64>, nth: Option<f64>, alpha0: Option<[f64; 2]>, t: Option<f64>) -> PanelFile {
    PanelFile { label: label.into(), kappa, nth, alpha0, t }
}

/// Sample inputs: quadratic models and two Kerr panel sets.
pub fn examples(opts: &Options) -> Outcome {
    let mut sink = Sink::new(&opts.out)?;
    sink.text("damped_oscillator.json", &canonical_quadratic(&QuadraticLindbladSpec::damped_oscillator(1.0, 0.5, 0.5))?)?;
    sink.text("fermion_level.json", &canonical_quadratic(&QuadraticLindbladSpec::fermion_level(0.7, 0.4, 0.3))?)?;
    let c = |re: f64| Complex64::new(re, 0.0);
    let h = CMat64::from_row_slice(2, 2, &[c(1.0), c(0.2), c(0.2), c(0.8)]);
    let mut d = DissipatorMatrices::zeros(2);
    d.l = CMat64::from_row_slice(2, 2, &[c(0.5), c(0.05), c(0.05), c(0.3)]);
    d.p = CMat64::from_row_slice(2, 2, &[c(0.02), c(0.0), c(0.0), c(0.01)]);
    let two = QuadraticLindbladSpec::new(Statistics::Boson, h, CMat64::zeros(2, 2), Baths::Direct(d))?;
    sink.text("two_mode.json", &canonical_quadratic(&two)?)?;
    let interference = KerrFile {
        omega0: 0.0,
        u: 1.0,
        kappa: 0.05,
        nth: 0.0,
        alpha0: [SQRT_2, SQRT_2],
        panels: vec![
            panel("initial", Some(0.0), Some(0.0), None, Some(0.0)),
            panel("closed", Some(0.0), Some(0.0), None, Some(PI)),
            panel("damped", None, None, None, Some(PI)),
            panel("thermal", None, Some(0.5), None, Some(PI)),
        ],
    };
    sink.text("kerr_interference.json", &canonical_kerr(&interference)?)?;
    let revivals = KerrFile {
        omega0: 0.0,
        u: 1.0,
        kappa: 0.05,
        nth: 0.0,
        alpha0: [2.0, 0.0],
        panels: vec![
            panel("nth0_a2", None, None, None, None),
            panel("nth02_a2", None, Some(0.2), None, None),
            panel("nth05_a2", None, Some(0.5), None, None),
            panel("nth0_a3", None, None, Some([3.0, 0.0]), None),
            panel("nth0_a4", None, None, Some([4.0, 0.0]), None),
        ],
    };
    sink.text("kerr_revivals.json", &canonical_kerr(&revivals)?)?;
    Ok(())
}

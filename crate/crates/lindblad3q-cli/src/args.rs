use clap::{Args, Parser, Subcommand, ValueEnum};
use lindblad3q::Complex64;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "lindblad3q", version, about = "Spectra, covariances and phase-space dynamics of quadratic and Kerr Lindbladians")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Options,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Liouvillian eigenvalues of a quadratic model.
    Spectrum,
    /// Steady-state covariance of a quadratic model.
    SteadyState,
    /// Covariance at each requested time, starting from the vacuum (bosons) or the fully mixed state (fermions).
    CovarianceEvolve,
    /// Wigner function of a single damped mode propagated by quadrature.
    WignerEvolve,
    /// Kerr Wigner function of a coherent initial state from the exact series.
    KerrWigner,
    /// Kerr mean amplitude ⟨a(t)⟩ for each panel of the model file.
    KerrAverage,
    /// Kerr evolution of a sampled Wigner grid.
    KerrPropagate,
    /// Compares an analytic pipeline against the Fock-space oracle.
    OracleCheck {
        #[arg(value_enum)]
        check: Check,
    },
    /// Writes sample model files.
    Examples,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Check {
    Spectrum,
    Covariance,
    Kernel,
    Wigner,
}

impl Check {
    pub fn name(self) -> &'static str {
        match self {
            Check::Spectrum => "spectrum",
            Check::Covariance => "covariance",
            Check::Kernel => "kernel",
            Check::Wigner => "wigner",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StatisticsArg {
    Boson,
    Fermion,
}

#[derive(Debug, Clone, Args)]
pub struct Options {
    /// Model file (JSON).
    #[arg(long, global = true)]
    pub model: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Times: comma-separated list or `start:stop:count`.
    #[arg(long = "t", global = true, value_parser = parse_times)]
    pub t: Option<Times>,
    /// Phase-space grid `extent:resolution` covering [−extent, extent]².
    #[arg(long, global = true, value_parser = parse_grid)]
    pub grid: Option<GridArg>,
    /// Largest Bessel order |l| summed.
    #[arg(long, global = true, default_value_t = 80)]
    pub lmax: u32,
    /// Series stops once three consecutive orders fall below this magnitude.
    #[arg(long = "term-tol", global = true, default_value_t = 1e-14)]
    pub term_tol: f64,
    /// Oracle Fock cutoff per mode.
    #[arg(long, global = true)]
    pub cutoff: Option<usize>,
    /// Largest oracle deviation accepted by `oracle-check`.
    #[arg(long = "check-tol", global = true, default_value_t = 1e-6)]
    pub check_tol: f64,
    /// Total excitation number enumerated by bosonic spectra.
    #[arg(long, global = true, default_value_t = 3)]
    pub excitations: u32,
    /// Expected statistics; a mismatch with the model file is an error.
    #[arg(long, global = true, value_enum)]
    pub statistics: Option<StatisticsArg>,
    /// Initial state of `wigner-evolve`: `coherent:re,im`, `thermal:n` or `fock:k`.
    #[arg(long, global = true, value_parser = parse_initial, default_value = "coherent:1,0")]
    pub initial: InitialState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Times(pub Vec<f64>);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridArg {
    pub extent: f64,
    pub resolution: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialState {
    Coherent(Complex64),
    Thermal(f64),
    Fock(u32),
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
    if !v.is_finite() {
        return Err(format!("`{s}` is not finite"));
    }
    Ok(v)
}

pub fn parse_times(s: &str) -> Result<Times, String> {
    let v = match s.split(':').collect::<Vec<_>>().as_slice() {
        [a, b, n] => {
            let (a, b) = (parse_f64(a)?, parse_f64(b)?);
            let n: usize = n.trim().parse().map_err(|_| format!("`{n}` is not a count"))?;
            match n {
                0 => return Err("time range needs at least one point".into()),
                1 => vec![a],
                _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
            }
        }
        [_] => s.split(',').map(parse_f64).collect::<Result<Vec<_>, _>>()?,
        _ => return Err("expected `t1,t2,...` or `start:stop:count`".into()),
    };
    if v.iter().any(|&t| t < 0.0) {
        return Err("times must be non-negative".into());
    }
    if v.windows(2).any(|w| w[1] <= w[0]) {
        return Err("times must be strictly ascending".into());
    }
    Ok(Times(v))
}

pub fn parse_grid(s: &str) -> Result<GridArg, String> {
    let (e, r) = s.split_once(':').ok_or("expected `extent:resolution`")?;
    let extent = parse_f64(e)?;
    let resolution: usize = r.trim().parse().map_err(|_| format!("`{r}` is not a resolution"))?;
    if extent <= 0.0 || resolution < 2 {
        return Err("grid needs extent > 0 and resolution ≥ 2".into());
    }
    Ok(GridArg { extent, resolution })
}

pub fn parse_initial(s: &str) -> Result<InitialState, String> {
    let (kind, arg) = s.split_once(':').ok_or("expected `coherent:re,im`, `thermal:n` or `fock:k`")?;
    match kind {
        "coherent" => {
            let (re, im) = arg.split_once(',').ok_or("coherent amplitude needs `re,im`")?;
            Ok(InitialState::Coherent(Complex64::new(parse_f64(re)?, parse_f64(im)?)))
        }
        "thermal" => {
            let n = parse_f64(arg)?;
            if n < 0.0 {
                return Err("thermal occupation must be non-negative".into());
            }
            Ok(InitialState::Thermal(n))
        }
        "fock" => arg.trim().parse().map(InitialState::Fock).map_err(|_| format!("`{arg}` is not a Fock level")),
        _ => Err(format!("unknown initial state `{kind}`")),
    }
}

impl std::fmt::Display for InitialState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InitialState::Coherent(a) => write!(f, "coherent:{},{}", a.re, a.im),
            InitialState::Thermal(n) => write!(f, "thermal:{n}"),
            InitialState::Fock(k) => write!(f, "fock:{k}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn time_lists_and_ranges() {
        assert_eq!(parse_times("0,1.5,3").unwrap().0, vec![0.0, 1.5, 3.0]);
        assert_eq!(parse_times("0:1:3").unwrap().0, vec![0.0, 0.5, 1.0]);
        assert!(parse_times("1,0").is_err());
        assert!(parse_times("-1").is_err());
        assert!(parse_times("0:1:0").is_err());
    }

    #[test]
    fn grids_and_initial_states() {
        assert_eq!(parse_grid("6:161").unwrap(), GridArg { extent: 6.0, resolution: 161 });
        assert!(parse_grid("6:1").is_err());
        assert!(parse_grid("0:10").is_err());
        assert_eq!(parse_initial("fock:2").unwrap(), InitialState::Fock(2));
        assert_eq!(parse_initial("coherent:1,-0.5").unwrap(), InitialState::Coherent(Complex64::new(1.0, -0.5)));
        assert!(parse_initial("thermal:-1").is_err());
    }
}

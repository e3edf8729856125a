use crate::args::{Options, StatisticsArg};
use lindblad3q::kerr::KerrModel;
use lindblad3q::model::{validate_spec, ModelFile, QuadraticLindbladSpec, Statistics};
use lindblad3q::{CMat64, Complex64, Error, KerrModel64, PhaseGrid64, Spec64};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

pub const CONVENTIONS: &str = "hbar = 1; i d(rho)/dt = L rho; phase-space variables sqrt2-scaled, W(alpha) = 2 Tr[P D(alpha/sqrt2)^dag rho D(alpha/sqrt2)]; S_mn = <{a_m, a_n^dag}>, A_mn = <[c_m, c_n^dag]>";

/// Error carrying the process exit status.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }

    pub fn mismatch(message: impl Into<String>) -> Self {
        Self { code: 4, message: message.into() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Unstable { .. } | Error::Defective(_) => 2,
            Error::SeriesNonConvergence { .. } | Error::Envelope(_) | Error::Numerical(_) => 3,
            _ => 1,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::usage(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Self::usage(e.to_string())
    }
}

pub type Outcome<T = ()> = Result<T, Failure>;

pub fn sha256_hex(text: &str) -> String {
    format!("{:x}", Sha256::digest(text.as_bytes()))
}

fn model_path(opts: &Options) -> Outcome<&Path> {
    opts.model.as_deref().ok_or_else(|| Failure::usage("--model is required"))
}

fn read_model(opts: &Options) -> Outcome<String> {
    let path = model_path(opts)?;
    fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

/// A parsed model with its canonical serialization and hash.
pub struct Loaded<M> {
    pub model: M,
    pub canonical: String,
    pub hash: String,
}

impl<M> Loaded<M> {
    fn new(model: M, canonical: String) -> Self {
        let hash = sha256_hex(&canonical);
        Self { model, canonical, hash }
    }
}

pub fn canonical_quadratic(spec: &Spec64) -> Outcome<String> {
    Ok(serde_json::to_string_pretty(&ModelFile::from_spec(spec))? + "\n")
}

/// Parses and validates a quadratic model; every violated invariant is reported.
pub fn load_quadratic(opts: &Options) -> Outcome<Loaded<Spec64>> {
    let spec = QuadraticLindbladSpec::<f64>::from_json_str(&read_model(opts)?)?;
    let report = validate_spec(&spec);
    if !report.passed() {
        let list: Vec<String> = report.violations.iter().map(|v| format!("{:?} (residual {:e})", v.invariant, v.residual)).collect();
        return Err(Failure::usage(format!("model violates {}", list.join(", "))));
    }
    let want = opts.statistics.map(|s| match s {
        StatisticsArg::Boson => Statistics::Boson,
        StatisticsArg::Fermion => Statistics::Fermion,
    });
    if want.is_some_and(|w| w != spec.statistics) {
        return Err(Failure::usage(format!("--statistics disagrees with the model file ({:?})", spec.statistics)));
    }
    let canonical = canonical_quadratic(&spec)?;
    Ok(Loaded::new(spec, canonical))
}

/// Kerr model file: `H = ω0 a†a + (U/2) a†a†aa`, loss `κ` into a bath with occupation `n̄`,
/// coherent initial state at `alpha0` (√2-scaled). Panels override any of these per output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KerrFile {
    pub omega0: f64,
    pub u: f64,
    pub kappa: f64,
    pub nth: f64,
    pub alpha0: [f64; 2],
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub panels: Vec<PanelFile>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PanelFile {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nth: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha0: Option<[f64; 2]>,
    /// Fixed time replacing `--t` for this panel.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Panel {
    pub label: String,
    pub model: KerrModel64,
    pub alpha0: Complex64,
    pub t: Option<f64>,
}

impl KerrFile {
    pub fn panels(&self) -> Outcome<Vec<Panel>> {
        let files = if self.panels.is_empty() {
            vec![PanelFile { label: "model".into(), kappa: None, nth: None, alpha0: None, t: None }]
        } else {
            self.panels.clone()
        };
        let mut out: Vec<Panel> = Vec::with_capacity(files.len());
        for p in files {
            if p.label.is_empty() || !p.label.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
                return Err(Failure::usage(format!("panel label `{}` must be non-empty [A-Za-z0-9_-]", p.label)));
            }
            if out.iter().any(|q| q.label == p.label) {
                return Err(Failure::usage(format!("duplicate panel label `{}`", p.label)));
            }
            if p.t.is_some_and(|t| !(t >= 0.0 && t.is_finite())) {
                return Err(Failure::usage(format!("panel `{}` has an invalid time", p.label)));
            }
            let a = p.alpha0.unwrap_or(self.alpha0);
            let values = [self.omega0, self.u, p.kappa.unwrap_or(self.kappa), p.nth.unwrap_or(self.nth), a[0], a[1]];
            if values.iter().any(|v| !v.is_finite()) {
                return Err(Failure::usage(format!("panel `{}` has non-finite parameters", p.label)));
            }
            let model = KerrModel::new(values[0], values[1], values[2], values[3])?;
            out.push(Panel { label: p.label, model, alpha0: Complex64::new(a[0], a[1]), t: p.t });
        }
        Ok(out)
    }
}

pub fn canonical_kerr(file: &KerrFile) -> Outcome<String> {
    Ok(serde_json::to_string_pretty(file)? + "\n")
}

pub fn load_kerr(opts: &Options) -> Outcome<(Loaded<KerrFile>, Vec<Panel>)> {
    let file: KerrFile = serde_json::from_str(&read_model(opts)?).map_err(|e| Failure::usage(format!("Kerr model file: {e}")))?;
    let panels = file.panels()?;
    let canonical = canonical_kerr(&file)?;
    Ok((Loaded::new(file, canonical), panels))
}

/// Output sink: creates the directory and remembers every file written.
pub struct Sink {
    dir: PathBuf,
    pub written: Vec<PathBuf>,
}

impl Sink {
    pub fn new(dir: &Path) -> Outcome<Self> {
        fs::create_dir_all(dir).map_err(|e| Failure::usage(format!("{}: {e}", dir.display())))?;
        Ok(Self { dir: dir.to_path_buf(), written: Vec::new() })
    }

    pub fn text(&mut self, name: &str, body: &str) -> Outcome {
        let path = self.dir.join(name);
        fs::write(&path, body)?;
        self.written.push(path);
        Ok(())
    }

    pub fn json(&mut self, name: &str, value: &Value) -> Outcome {
        self.text(name, &(serde_json::to_string_pretty(value)? + "\n"))
    }

    pub fn grid(&mut self, name: &str, grid: &PhaseGrid64, meta: &Meta) -> Outcome {
        let path = self.dir.join(name);
        grid.write_csv(fs::File::create(&path)?, &meta.pairs)?;
        self.written.push(path);
        Ok(())
    }
}

/// Ordered key/value metadata attached to every numeric output.
#[derive(Clone, Debug, Default)]
pub struct Meta {
    pub pairs: Vec<(String, String)>,
}

impl Meta {
    pub fn new(command: &str, model_hash: &str) -> Self {
        let mut m = Self::default();
        m.push("tool", concat!("lindblad3q ", env!("CARGO_PKG_VERSION")));
        m.push("command", command);
        m.push("model_sha256", model_hash);
        m.push("conventions", CONVENTIONS);
        m
    }

    pub fn push(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.pairs.push((key.to_string(), value.to_string()));
        self
    }

    pub fn with(&self, key: &str, value: impl ToString) -> Self {
        let mut m = self.clone();
        m.push(key, value);
        m
    }

    pub fn to_json(&self) -> Value {
        let mut map = Map::new();
        for (k, v) in &self.pairs {
            map.insert(k.clone(), Value::String(v.clone()));
        }
        Value::Object(map)
    }

    /// `# key: value` lines.
    pub fn header(&self) -> String {
        self.pairs.iter().map(|(k, v)| format!("# {k}: {v}\n")).collect()
    }
}

pub fn complex_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

pub fn matrix_json(m: &CMat64) -> Value {
    Value::Array((0..m.nrows()).map(|i| Value::Array((0..m.ncols()).map(|j| complex_json(m[(i, j)])).collect())).collect())
}

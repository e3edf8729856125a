use lindblad3q::phasespace::PhaseGrid;
use serde_json::Value;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use tempfile::TempDir;

fn run(args: &[&str]) -> i32 {
    let out = Command::new(env!("CARGO_BIN_EXE_lindblad3q")).args(args).env("LINDBLAD3Q_THREADS", "1").output().expect("binary runs");
    out.status.code().expect("exit code")
}

fn examples() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["examples", "--out", s(dir.path())]), 0);
    dir
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn model(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn spectrum_starts_at_zero_and_model_round_trips() {
    let ex = examples();
    let out = tempfile::tempdir().unwrap();
    let m = model(&ex, "damped_oscillator.json");
    assert_eq!(run(&["spectrum", "--model", s(&m), "--out", s(out.path())]), 0);
    let v = json(out.path().join("spectrum.json"));
    let first = &v["spectrum"][0];
    assert_eq!((first["re"].as_f64(), first["im"].as_f64()), (Some(0.0), Some(0.0)));
    assert_eq!(first["mu"], serde_json::json!([0]));
    assert_eq!(v["spectrum"].as_array().unwrap().len(), 10);
    let again = tempfile::tempdir().unwrap();
    assert_eq!(run(&["spectrum", "--model", s(&out.path().join("model.json")), "--out", s(again.path())]), 0);
    let w = json(again.path().join("spectrum.json"));
    assert_eq!(v["metadata"]["model_sha256"], w["metadata"]["model_sha256"]);
    assert_eq!(fs::read(out.path().join("spectrum.json")).unwrap(), fs::read(again.path().join("spectrum.json")).unwrap());
}

#[test]
fn kernel_check_passes_on_the_damped_oscillator() {
    let ex = examples();
    let out = tempfile::tempdir().unwrap();
    let m = model(&ex, "damped_oscillator.json");
    assert_eq!(run(&["oracle-check", "kernel", "--model", s(&m), "--out", s(out.path()), "--t", "1", "--check-tol", "1e-8"]), 0);
    let r = json(out.path().join("oracle_kernel.json"));
    assert_eq!(r["pass"], Value::Bool(true));
    assert!(r["max_abs_err"].as_f64().unwrap() < 1e-8);
    assert_eq!(r["tolerance"].as_f64(), Some(1e-8));
}

#[test]
fn kerr_wigner_emits_four_panels_and_a_square_layout() {
    let ex = examples();
    let out = tempfile::tempdir().unwrap();
    let m = model(&ex, "kerr_interference.json");
    assert_eq!(run(&["kerr-wigner", "--model", s(&m), "--out", s(out.path()), "--grid", "6:41"]), 0);
    for label in ["initial", "closed", "damped", "thermal"] {
        let path = out.path().join(format!("kerr_wigner_{label}.csv"));
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.contains("# model_sha256: ") && text.contains("# term_tol: "));
        let g = PhaseGrid::<f64>::read_csv(std::io::BufReader::new(fs::File::open(&path).unwrap())).unwrap();
        assert_eq!((g.n_re, g.n_im), (41, 41));
        assert!((g.normalization().re - 1.0).abs() < 1e-7, "{label}");
    }
    let script = fs::read_to_string(out.path().join("kerr_wigner.gp")).unwrap();
    assert!(script.contains("layout 2,2"));
    assert_eq!(script.matches("with image").count(), 4);
}

#[test]
fn kerr_average_curves_start_at_one() {
    let ex = examples();
    let out = tempfile::tempdir().unwrap();
    let m = model(&ex, "kerr_revivals.json");
    assert_eq!(run(&["kerr-average", "--model", s(&m), "--out", s(out.path()), "--t", "0:12.566370614359172:33"]), 0);
    let text = fs::read_to_string(out.path().join("kerr_average_nth05_a2.csv")).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with('t'))
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 33);
    assert_eq!(rows[0][5], 1.0);
    assert!(rows.iter().all(|r| r[5] <= 1.0 + 1e-12));
    let script = fs::read_to_string(out.path().join("kerr_average.gp")).unwrap();
    assert_eq!(script.matches("using 2:6").count(), 5);
}

#[test]
fn covariance_and_wigner_evolution() {
    let ex = examples();
    let out = tempfile::tempdir().unwrap();
    let f = model(&ex, "fermion_level.json");
    assert_eq!(run(&["covariance-evolve", "--model", s(&f), "--out", s(out.path()), "--t", "0,50"]), 0);
    let v = json(out.path().join("covariance.json"));
    assert_eq!(v["trajectory"][0]["covariance"][0][0][0].as_f64(), Some(0.0));
    let late = v["trajectory"][1]["covariance"][0][0][0].as_f64().unwrap();
    assert!((late - (1.0 - 2.0 * 0.3)).abs() < 1e-6);
    let b = model(&ex, "damped_oscillator.json");
    let args = ["wigner-evolve", "--model", s(&b), "--out", s(out.path()), "--t", "0,2", "--grid", "6:31", "--initial", "coherent:1,1"];
    assert_eq!(run(&args), 0);
    let g = PhaseGrid::<f64>::read_csv(std::io::BufReader::new(fs::File::open(out.path().join("wigner_t1.csv")).unwrap())).unwrap();
    assert!((g.normalization().re - 1.0).abs() < 1e-6);
    assert!(out.path().join("wigner.gp").exists());
}

#[test]
fn failures_map_to_exit_codes() {
    let ex = examples();
    let dir = tempfile::tempdir().unwrap();
    let o = s(dir.path());
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"statistics":"boson","modes":1}"#).unwrap();
    assert_eq!(run(&["spectrum", "--model", s(&bad), "--out", o]), 1);
    let nonherm = dir.path().join("nonherm.json");
    fs::write(&nonherm, r#"{"statistics":"boson","modes":2,"H":[[[1,0],[0.5,0]],[[0,0],[1,0]]],"L":[[[0.1,0],[0,0]],[[0,0],[0.1,0]]],"P":[[[0,0],[0,0]],[[0,0],[0,0]]]}"#).unwrap();
    assert_eq!(run(&["spectrum", "--model", s(&nonherm), "--out", o]), 1);
    assert_eq!(run(&["spectrum", "--model", s(&model(&ex, "fermion_level.json")), "--statistics", "boson", "--out", o]), 1);
    assert_eq!(run(&["spectrum", "--out", o, "--grid", "1:1"]), 1);
    let unstable = dir.path().join("unstable.json");
    fs::write(&unstable, r#"{"statistics":"boson","modes":1,"H":[[[1,0]]],"L":[[[0.1,0]]],"P":[[[0.3,0]]]}"#).unwrap();
    assert_eq!(run(&["steady-state", "--model", s(&unstable), "--out", o]), 2);
    let kerr = model(&ex, "kerr_interference.json");
    assert_eq!(run(&["kerr-wigner", "--model", s(&kerr), "--out", o, "--lmax", "2", "--grid", "2:5"]), 3);
    let two = model(&ex, "two_mode.json");
    assert_eq!(run(&["oracle-check", "spectrum", "--model", s(&two), "--out", o, "--cutoff", "3", "--excitations", "2", "--check-tol", "1e-12"]), 4);
    let r = json(dir.path().join("oracle_spectrum.json"));
    assert_eq!(r["pass"], Value::Bool(false));
}

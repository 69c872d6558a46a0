use std::path::Path;
use std::process::Command;

use robin_inverse::cli::{read_field, ExperimentConfig};

fn robin(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_robin"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, json: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, json).unwrap();
    path.to_str().unwrap().to_string()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_zero_problem_is_zero_and_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "zero.json",
        r#"{"problem": {"f": "zero", "g": "zero"}, "mesh": {"n": 16, "n_fine": 64}}"#,
    );
    let out1 = dir.path().join("q1.txt");
    let out2 = dir.path().join("q2.txt");
    for out in [&out1, &out2] {
        let o = robin(&["simulate", "--config", &cfg, "--out", s(out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(String::from_utf8_lossy(&o.stdout).contains("n_fine=64"));
    }
    let q = read_field(&out1).unwrap();
    assert_eq!(q.n_per_side(), 64);
    assert!(q.values().iter().all(|&v| v == 0.0));
    assert_eq!(std::fs::read(&out1).unwrap(), std::fs::read(&out2).unwrap());
}

#[test]
fn reconstruct_inverse_crime_from_truth_takes_one_step() {
    let dir = tempfile::tempdir().unwrap();
    let truth = ExperimentConfig::default().a_true;
    let json = format!(
        r#"{{"mesh": {{"n": 64, "n_fine": 64}}, "x0": {{"alpha": {:?}, "beta": {:?}}}}}"#,
        truth.alpha, truth.beta
    );
    let cfg = write_config(dir.path(), "crime.json", &json);
    let data = dir.path().join("q.txt");
    let result = dir.path().join("result.txt");
    let trace = dir.path().join("trace.csv");
    assert!(robin(&["simulate", "--config", &cfg, "--out", s(&data)]).status.success());
    let o = robin(&[
        "reconstruct", "--config", &cfg, "--data", s(&data), "--out", s(&result), "--trace", s(&trace),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&result).unwrap();
    assert!(text.contains("converged=true"));
    assert!(text.contains("iterations=1\n"));
    let trace = std::fs::read_to_string(&trace).unwrap();
    let lines: Vec<&str> = trace.lines().collect();
    assert_eq!(lines[0], "k,res_norm,step,c1_error");
    assert_eq!(lines.len(), 2);
    let c1: f64 = lines[1].rsplit(',').next().unwrap().parse().unwrap();
    assert_eq!(c1, 0.0);
}

#[test]
fn reconstruct_rejects_non_positive_start() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.json",
        r#"{"basis": [1, 1], "x0": {"alpha": [1.0], "beta": [3.0]}, "mesh": {"n": 16}}"#,
    );
    let o = robin(&[
        "reconstruct", "--config", &cfg, "--data", "/nonexistent", "--out", s(&dir.path().join("r.txt")),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("x0") && err.contains("positive"), "{err}");
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "typo.json", r#"{"newton": {"tolerance": 1e-8}}"#);
    let o = robin(&["condition", "--config", &cfg, "--out", s(&dir.path().join("c.csv"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("tolerance"));
}

#[test]
fn data_mesh_must_nest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"problem": {"f": "zero", "g": "zero"}, "mesh": {"n": 24, "n_fine": 64}}"#,
    );
    let data = dir.path().join("q.txt");
    assert!(robin(&["simulate", "--config", &cfg, "--out", s(&data)]).status.success());
    let o = robin(&["reconstruct", "--config", &cfg, "--data", s(&data), "--out", s(&dir.path().join("r"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn condition_csv_small() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"condition": {"n": 16, "max_modes": 3}}"#);
    let out = dir.path().join("c.csv");
    let o = robin(&["--threads", "1", "condition", "--config", &cfg, "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "J,kappa");
    assert_eq!(lines.len(), 4);
    let kappa: Vec<f64> = lines[1..].iter().map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(kappa.windows(2).all(|w| w[1] > w[0]), "{kappa:?}");
    assert!(kappa.iter().all(|&k| k >= 1.0));
}

#[test]
fn eoc_and_subspace_csv_small() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "e.json",
        r#"{"mesh": {"n": 16, "fine": "per_row"}, "eoc": {"n_list": [16, 32]}, "subspace": {"pairs": [[2, 2]]}}"#,
    );
    let eoc = dir.path().join("eoc.csv");
    let o = robin(&["eoc", "--config", &cfg, "--out", s(&eoc)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&eoc).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "h,error,eoc");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].ends_with(",NA"));

    let sub = dir.path().join("sub.csv");
    let o = robin(&["subspace", "--config", &cfg, "--out", s(&sub)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&sub).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,a_true,\"a_(2,2)\""));
    let first: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    let truth = robin_inverse::robin_basis::reference_truth();
    assert_eq!(first[0], 0.0);
    assert_eq!(first[1], truth.eval(0.0));
    assert_eq!(text.lines().count(), 513);
}

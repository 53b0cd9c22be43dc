use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn run(dir: &Path, args: &[&str], config: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_polyharm"));
    cmd.args(args).arg("--out").arg(dir.join("out"));
    if let Some(c) = config {
        let path = dir.join("config.json");
        fs::write(&path, c).unwrap();
        cmd.arg("--config").arg(path);
    }
    cmd.output().unwrap()
}

/// Data rows of a CSV written by the tool, after checking its header.
fn rows(path: PathBuf) -> Vec<Vec<f64>> {
    let text = fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    let head = lines.next().unwrap();
    assert!(head.starts_with("# polyharm "), "{head}");
    assert!(head.contains("config-sha256 "), "{head}");
    lines.next().unwrap();
    lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect()
}

#[test]
fn eval_kernel_at_half() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &["eval"],
        Some(r#"{"eval":{"target":"kernel","queries":[{"z":[{"re":0.5}]}]}}"#),
    );
    assert!(out.status.success());
    let r = rows(dir.path().join("out/eval.csv"));
    assert!((r[0][1] - 3.0).abs() < 1e-12 && r[0][2] == 0.0, "{r:?}");
}

#[test]
fn eval_poisson_of_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["eval"], None);
    assert!(out.status.success());
    let r = rows(dir.path().join("out/eval.csv"));
    assert!((r[0][1] - 1.0).abs() < 1e-12, "{r:?}");
}

#[test]
fn invalid_alpha_exits_2_naming_axis() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &["eval"],
        Some(r#"{"params":{"alpha":[{"re":-2}],"beta":[{"re":0}]}}"#),
    );
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("axis 1"), "{err}");
}

#[test]
fn malformed_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["eval"], Some("{ not json"));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn boundary_query_trips_numerical_guard() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &["eval"],
        Some(r#"{"eval":{"target":"kernel","queries":[{"radii":[0.9999999999999],"angles":[0.0]}]}}"#),
    );
    assert_eq!(out.status.code(), Some(3));
}

fn verify_report(dir: &Path, extra: &[&str], config: Option<&str>) -> (Option<i32>, Value, String) {
    let mut args = vec!["verify"];
    args.extend_from_slice(extra);
    let out = run(dir, &args, config);
    let report = fs::read_to_string(dir.join("out/verify.json")).unwrap();
    let v = serde_json::from_str(&report).unwrap();
    (out.status.code(), v, String::from_utf8_lossy(&out.stderr).into_owned())
}

fn pattern(v: &Value) -> Vec<(String, bool)> {
    v["suites"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| (s["suite"].as_str().unwrap().to_string(), s["cases"] == s["passes"]))
        .collect()
}

#[test]
fn verify_default_passes() {
    let dir = tempfile::tempdir().unwrap();
    let (code, v, _) = verify_report(dir.path(), &[], None);
    assert_eq!(code, Some(0));
    assert!(v["suites"].as_array().unwrap().len() >= 8);
}

#[test]
fn verify_tight_quadrature_fails() {
    let dir = tempfile::tempdir().unwrap();
    let (code, v, err) = verify_report(dir.path(), &[], Some(r#"{"tolerances":{"quadrature":1e-16}}"#));
    assert_eq!(code, Some(1));
    assert!(err.contains("quadrature"), "{err}");
    let failing: Vec<_> = pattern(&v).into_iter().filter(|p| !p.1).collect();
    assert_eq!(failing, vec![("quadrature".to_string(), false)]);
}

#[test]
fn verify_seed_keeps_pattern() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let (_, va, _) = verify_report(a.path(), &["--seed", "1"], None);
    let (_, vb, _) = verify_report(b.path(), &["--seed", "2"], None);
    assert_eq!(pattern(&va), pattern(&vb));
}

#[test]
fn scan_weak11_delta_below_bound() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &["scan"],
        Some(r#"{"data":{"kind":"atoms","atoms":[{"angles":[0.0],"weight":{"re":1}}]},"scan":{"kind":"weak11"}}"#),
    );
    assert!(out.status.success());
    let r = rows(dir.path().join("out/weak11.csv"));
    assert!(!r.is_empty());
    for row in &r {
        assert!(row[1] <= row[2], "{row:?}");
    }
    assert!(dir.path().join("out/weak11.gp").exists());
}

#[test]
fn scan_convergence_decreases() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"params":{"alpha":[{"re":0},{"re":0}],"beta":[{"re":0},{"re":0}]},
        "grid":[16,16],"data":{"kind":"smooth"},"scan":{"kind":"convergence"}}"#;
    let out = run(dir.path(), &["scan"], Some(cfg));
    assert!(out.status.success());
    let r = rows(dir.path().join("out/convergence.csv"));
    for col in 1..4 {
        assert!(r.windows(2).all(|w| w[1][col] < w[0][col]), "{r:?}");
    }
}

#[test]
fn scan_fatou_fraction_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"params":{"alpha":[{"re":0.3},{"re":0.3}],"beta":[{"re":0.3},{"re":0.3}]},
        "grid":[16,16],"data":{"kind":"smooth"},"scan":{"kind":"fatou"},"fatou":{"vertices":[8]}}"#;
    let out = run(dir.path(), &["scan"], Some(cfg));
    assert!(out.status.success());
    let summary: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/fatou_summary.json")).unwrap()).unwrap();
    assert_eq!(summary["fraction"], 1.0);
    assert_eq!(rows(dir.path().join("out/fatou.csv")).len(), 64);
}

#[test]
fn other_commands_write_tables() {
    let dir = tempfile::tempdir().unwrap();
    let smooth = r#"{"params":{"alpha":[{"re":0},{"re":0}],"beta":[{"re":0},{"re":0}]},
        "grid":[16,16],"data":{"kind":"smooth"}}"#;
    assert!(run(dir.path(), &["expand"], Some(smooth)).status.success());
    let c = rows(dir.path().join("out/coeffs.csv"));
    assert_eq!(c.len(), 4);
    assert!(run(dir.path(), &["dirichlet"], Some(smooth)).status.success());
    assert_eq!(rows(dir.path().join("out/dirichlet.csv")).len(), 2 * 256);

    let atoms = r#"{"data":{"kind":"random_atoms","count":3},"maximal":{"kind":{"q":0.5},"grid":[64]},
        "fatou":{"vertices":[4]}}"#;
    assert!(run(dir.path(), &["maximal"], Some(atoms)).status.success());
    assert_eq!(rows(dir.path().join("out/maximal.csv")).len(), 64);
    assert!(run(dir.path(), &["fatou"], Some(atoms)).status.success());
    assert_eq!(rows(dir.path().join("out/fatou_vertices.csv")).len(), 4);
}

#[test]
fn dump_defaults_round_trips() {
    let out = Command::new(env!("CARGO_BIN_EXE_polyharm")).arg("--dump-defaults").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let again = run(dir.path(), &["eval"], Some(&text));
    assert!(again.status.success(), "{}", String::from_utf8_lossy(&again.stderr));
}

#[test]
fn csv_is_identical_across_workers() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = r#"{"data":{"kind":"random_atoms","count":5},"maximal":{"kind":{"q":0.25},"grid":[256]}}"#;
    assert!(run(a.path(), &["maximal", "--workers", "1"], Some(cfg)).status.success());
    assert!(run(b.path(), &["maximal", "--workers", "4"], Some(cfg)).status.success());
    let x = fs::read(a.path().join("out/maximal.csv")).unwrap();
    let y = fs::read(b.path().join("out/maximal.csv")).unwrap();
    assert_eq!(x, y);
}

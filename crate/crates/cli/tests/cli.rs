use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn rsqmc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rsqmc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn generate_then_integrate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let points = dir.path().join("points.txt");
    let out = rsqmc(&[
        "generate", "--m", "8", "--s", "2", "--x", "6", "--output", points.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&points).unwrap();
    assert_eq!(text.lines().count(), 256);
    assert!(text.lines().all(|l| l.split_whitespace().count() == 3));

    let from_file = rsqmc(&["integrate", "--points", points.to_str().unwrap(), "--integrand", "gaussian-exp"]);
    assert!(from_file.status.success());
    let a: Value = serde_json::from_str(&stdout(&from_file)).unwrap();
    let direct = rsqmc(&["integrate", "--m", "8", "--s", "2", "--x", "6"]);
    assert!(direct.status.success());
    let b: Value = serde_json::from_str(&stdout(&direct)).unwrap();
    let (va, vb) = (a["value"].as_f64().unwrap(), b[0]["value"].as_f64().unwrap());
    assert!((va - vb).abs() <= 1e-12 * vb.abs(), "{va} vs {vb}");
    assert_eq!(a["points"], 256);
}

#[test]
fn generate_needs_a_single_set() {
    assert_eq!(rsqmc(&["generate", "--m", "6", "--s", "2"]).status.code(), Some(2));
    assert_eq!(rsqmc(&["generate", "--m-min", "5", "--m-max", "6", "--x", "6"]).status.code(), Some(2));
}

#[test]
fn bench_emits_table_layout() {
    let out = rsqmc(&["bench", "--m-min", "6", "--m-max", "8"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = stdout(&out);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "m,e_rs_X6,e_rs_X12,e_invcom,t_rs_X6,t_rs_X12,t_invcom");
    assert_eq!(lines.len(), 4);
    for line in &lines[1..] {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols.len(), 7);
        for e in &cols[1..4] {
            let v: f64 = e.parse().unwrap();
            assert!(v.is_finite() && v > 0.0);
        }
        assert!(cols[4..].iter().all(|t| t.split('.').nth(1).map(str::len) == Some(3)));
    }
}

#[test]
fn bench_reads_config_and_writes_output() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bench.toml");
    let csv = dir.path().join("table.csv");
    fs::write(
        &config,
        format!("m_min = 5\nm_max = 9\ns = 2\nX = [4.0]\noutput = {:?}\n", csv.to_str().unwrap()),
    )
    .unwrap();
    // the flag narrows the m range from the file
    let out = rsqmc(&["bench", "--config", config.to_str().unwrap(), "--m-max", "6"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).is_empty());
    let text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "m,e_rs_X4,e_invcom,t_rs_X4,t_invcom");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("5,") && lines[2].starts_with("6,"));
}

#[test]
fn bench_errors_are_bit_reproducible() {
    let run = || {
        let csv = stdout(&rsqmc(&["bench", "--m-min", "7", "--m-max", "9", "--s", "2"]));
        csv.lines()
            .map(|l| l.split(',').take(4).collect::<Vec<_>>().join(","))
            .collect::<Vec<_>>()
    };
    assert_eq!(run(), run());
}

#[test]
fn invalid_configs_exit_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = dir.path().join("unknown.toml");
    fs::write(&unknown, "m_min = 5\ncolour = \"red\"\n").unwrap();
    for args in [
        vec!["bench", "--m-min", "9", "--m-max", "8"],
        vec!["bench", "--x", "-1"],
        vec!["bench", "--s", "0"],
        vec!["bench", "--integrand", "nope"],
        vec!["bench", "--config", unknown.to_str().unwrap()],
        vec!["bench", "--config", "/nonexistent/config.toml"],
        vec!["verify", "--m", "40"],
        vec!["bound", "--m", "10", "--s", "2", "--alpha", "0.4"],
        vec!["bench", "--scheme", "spiral"],
    ] {
        let out = rsqmc(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn verify_reports_passing_checks() {
    let dir = tempfile::tempdir().unwrap();
    let report_path = dir.path().join("report.json");
    let out = rsqmc(&[
        "verify", "--m-min", "5", "--m-max", "7", "--s", "2", "--scheme", "dyadic", "--output",
        report_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_str(&fs::read_to_string(&report_path).unwrap()).unwrap();
    let checks = report["checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    assert!(checks.iter().all(|c| c["passed"] == true));
    assert!(checks.iter().any(|c| c["name"] == "delta-zero"));
}

#[test]
fn bound_prints_closed_forms() {
    let out = rsqmc(&["bound", "--m", "20", "--s", "2", "--t", "0"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let rational = v["closed_form"]["rational"].as_f64().unwrap();
    assert!((rational - 419.2552757669732).abs() < 1e-9);
    let tight = rsqmc(&["bound", "--m", "20", "--s", "2", "--t", "0", "--variant", "tight"]);
    let p: Value = serde_json::from_str(&stdout(&tight)).unwrap();
    assert!(p["closed_form"]["rational"].as_f64().unwrap() < rational);

    let small = rsqmc(&["bound", "--m", "5", "--s", "2", "--construction"]);
    assert!(small.status.success());
    let s: Value = serde_json::from_str(&stdout(&small)).unwrap();
    assert!(s["closed_form"]["rational"]["unavailable"].is_string());
    assert!(s["construction"]["exponential"]["total"].as_f64().unwrap() > 0.0);
}

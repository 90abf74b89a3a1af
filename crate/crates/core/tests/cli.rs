use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn nocurl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nocurl")).args(args).env_remove("NOCURL_JOBS").output().unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = nocurl(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn simulate(dir: &Path, extra: &[&str]) {
    let mut args = vec!["simulate", "--d", "6", "--k", "1", "--n", "300", "--seed", "7", "--out", p(dir)];
    args.extend_from_slice(extra);
    ok(&args);
}

#[test]
fn simulate_is_deterministic() {
    let t = tempfile::tempdir().unwrap();
    let (a, b) = (t.path().join("a"), t.path().join("b"));
    simulate(&a, &[]);
    simulate(&b, &[]);
    for f in ["X.csv", "A_true.csv", "meta.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    let meta = json(&a.join("meta.json"));
    assert_eq!(meta["format_version"], 1);
    assert_eq!(meta["generator"], "chacha8");
}

#[test]
fn noiseless_simulation_gives_zero_data() {
    let t = tempfile::tempdir().unwrap();
    simulate(t.path(), &["--noise", "none"]);
    let x = std::fs::read_to_string(t.path().join("X.csv")).unwrap();
    assert!(x.lines().all(|l| l.split(',').all(|v| v.parse::<f64>().unwrap() == 0.0)));
}

#[test]
fn simulate_rejects_too_dense_graph() {
    let t = tempfile::tempdir().unwrap();
    let out = nocurl(&["simulate", "--d", "4", "--k", "3", "--n", "10", "--out", p(t.path())]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
}

#[test]
fn learn_then_eval() {
    let t = tempfile::tempdir().unwrap();
    let sim = t.path().join("sim");
    let fit = t.path().join("fit");
    simulate(&sim, &[]);
    ok(&["learn", "--data", p(&sim.join("X.csv")), "--variant", "nocurl2", "--out", p(&fit)]);
    let r = json(&fit.join("result.json"));
    assert_eq!(r["variant"], "nocurl2");
    assert!(r["final_h"].as_f64().unwrap() <= 1e-8);
    assert_eq!(r["p_tilde"].as_array().unwrap().len(), 6);

    let out = ok(&[
        "eval",
        "--pred",
        p(&fit.join("A_hat.csv")),
        "--truth",
        p(&sim.join("A_true.csv")),
        "--data",
        p(&sim.join("X.csv")),
    ]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["shd"].as_u64().unwrap() <= 2, "{v}");
    assert!(v["delta_f"].is_number());

    let out = ok(&["eval", "--pred", p(&sim.join("A_true.csv")), "--truth", p(&sim.join("A_true.csv"))]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["shd"], 0);
    assert!(v.get("delta_f").is_none());
}

#[test]
fn learn_notears_records_schedule() {
    let t = tempfile::tempdir().unwrap();
    let sim = t.path().join("sim");
    let fit = t.path().join("fit");
    simulate(&sim, &[]);
    ok(&["learn", "--data", p(&sim.join("X.csv")), "--variant", "notears", "--out", p(&fit)]);
    let r = json(&fit.join("result.json"));
    assert_eq!(r["notears_schedule"]["rho_factor"], 10.0);
    let trace = r["notears_trace"].as_array().unwrap();
    assert!(!trace.is_empty());
    assert!(trace.windows(2).all(|w| w[1]["rho"].as_f64() >= w[0]["rho"].as_f64()));
}

#[test]
fn learn_input_errors_exit_nonzero() {
    let t = tempfile::tempdir().unwrap();
    let out = nocurl(&["learn", "--out", p(t.path())]);
    assert_eq!(out.status.code(), Some(1));

    let bad = t.path().join("bad.csv");
    std::fs::write(&bad, "1,2,3\n4,x,6\n").unwrap();
    let out = nocurl(&["learn", "--data", p(&bad), "--out", p(&t.path().join("o"))]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("row 2") && err.contains("column 2"), "{err}");
}

#[test]
fn bench_writes_rows_and_consistent_summary() {
    let t = tempfile::tempdir().unwrap();
    let run = |dir: &Path, jobs: &str| {
        ok(&[
            "bench", "--d", "5", "--k", "1", "--n", "200", "--trials", "3", "--variants", "nocurl1,nocurl2_minus",
            "--seed", "3", "--jobs", jobs, "--out", p(dir),
        ]);
    };
    let (a, b) = (t.path().join("a"), t.path().join("b"));
    run(&a, "1");
    run(&b, "2");

    let read = |dir: &Path| {
        let mut r = csv::Reader::from_path(dir.join("results.csv")).unwrap();
        let h = r.headers().unwrap().clone();
        let rows: Vec<csv::StringRecord> = r.records().map(|x| x.unwrap()).collect();
        (h, rows)
    };
    let (h, rows_a) = read(&a);
    let (_, rows_b) = read(&b);
    assert_eq!(rows_a.len(), 6);
    let col = |name: &str| h.iter().position(|x| x == name).unwrap();
    let strip = |rows: &[csv::StringRecord]| -> Vec<Vec<String>> {
        rows.iter()
            .map(|r| r.iter().enumerate().filter(|(i, _)| *i != col("time_seconds")).map(|(_, v)| v.into()).collect())
            .collect()
    };
    assert_eq!(strip(&rows_a), strip(&rows_b));

    let s = json(&a.join("summary.json"));
    for cell in s["cells"].as_array().unwrap() {
        let shds: Vec<f64> = rows_a
            .iter()
            .filter(|r| r[col("variant")] == *cell["variant"].as_str().unwrap())
            .map(|r| r[col("shd")].parse().unwrap())
            .collect();
        let n = shds.len() as f64;
        let mean = shds.iter().sum::<f64>() / n;
        let var = shds.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((cell["shd"]["mean"].as_f64().unwrap() - mean).abs() < 1e-12);
        assert!((cell["shd"]["se"].as_f64().unwrap() - (var / n).sqrt()).abs() < 1e-12);
    }
}

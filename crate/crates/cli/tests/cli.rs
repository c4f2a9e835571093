use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn l1l2(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_l1l2"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn gen_writes_files_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (d1, d2) = (dir.path().join("one"), dir.path().join("two"));
    for d in [&d1, &d2] {
        let out = l1l2(&[
            "gen",
            "--kind",
            "dct",
            "--m",
            "64",
            "--n",
            "256",
            "--F",
            "10",
            "--seed",
            "7",
            "--out-dir",
            p(d),
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    for f in ["A.csv", "x.csv", "b.csv", "meta.json"] {
        assert_eq!(read(&d1.join(f)), read(&d2.join(f)), "{f} differs");
    }
    let a = read(&d1.join("A.csv"));
    assert_eq!(a.lines().count(), 64);
    assert_eq!(a.lines().next().unwrap().split(',').count(), 256);
    let meta: Value = serde_json::from_str(&read(&d1.join("meta.json"))).unwrap();
    assert_eq!(meta["seeds"]["matrix"], 7);
    assert!(meta["prng"].as_str().unwrap().contains("ChaCha8"));
    assert_eq!(meta["column_norms"].as_array().unwrap().len(), 256);
}

#[test]
fn gen_gaussian_regime() {
    let dir = tempfile::tempdir().unwrap();
    let out = l1l2(&[
        "gen",
        "--kind",
        "gauss",
        "--corr",
        "0.8",
        "--m",
        "128",
        "--n",
        "1024",
        "--seed",
        "1",
        "--s",
        "15",
        "--out-dir",
        p(dir.path()),
    ]);
    assert!(out.status.success());
    let x = read(&dir.path().join("x.csv"));
    let nnz = x
        .lines()
        .filter(|l| l.trim().parse::<f64>().unwrap() != 0.0)
        .count();
    assert_eq!(nnz, 15);
}

#[test]
fn solve_identity_instance() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("A.csv");
    let b = dir.path().join("b.csv");
    std::fs::write(&a, "1,0,0\n0,1,0\n0,0,1\n").unwrap();
    std::fs::write(&b, "0\n2\n0\n").unwrap();
    let out = l1l2(&[
        "solve",
        "--a",
        p(&a),
        "--b",
        p(&b),
        "--gamma",
        "1e-8",
        "--beta",
        "1",
        "--tol",
        "1e-12",
        "--kmax-mult",
        "1000",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = json(&out);
    let x: Vec<f64> = serde_json::from_value(report["x_final"].clone()).unwrap();
    assert!(
        (x[1] - 2.0).abs() < 1e-6 && x[0] == 0.0 && x[2] == 0.0,
        "{x:?}"
    );
    assert_eq!(report["converged"], true);
}

#[test]
fn iteration_cap_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = l1l2(&[
        "gen",
        "--m",
        "16",
        "--n",
        "40",
        "--s",
        "4",
        "--out-dir",
        p(dir.path()),
    ]);
    assert!(out.status.success());
    let out = l1l2(&[
        "solve",
        "--a",
        p(&dir.path().join("A.csv")),
        "--b",
        p(&dir.path().join("b.csv")),
        "--kmax-mult",
        "1",
        "--tol",
        "1e-14",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["converged"], false);
}

#[test]
fn fb_auto_step_and_l1_chain() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(l1l2(&[
        "gen",
        "--m",
        "16",
        "--n",
        "40",
        "--s",
        "3",
        "--out-dir",
        p(d)
    ])
    .status
    .success());
    let a = d.join("A.csv");
    let b = d.join("b.csv");
    let out = l1l2(&[
        "solve",
        "--a",
        p(&a),
        "--b",
        p(&b),
        "--solver",
        "fb",
        "--alpha",
        "auto",
    ]);
    let report = json(&out);
    let alpha = report["config"]["alpha"].as_f64().unwrap();
    let lip = report["lipschitz"].as_f64().unwrap();
    assert!((alpha - 0.9 / lip).abs() <= 1e-12 * alpha);

    let out = l1l2(&["solve", "--a", p(&a), "--b", p(&b), "--init", "l1"]);
    let report = json(&out);
    assert_eq!(report["solver"], "AdmmPlus");
    assert_eq!(report["warm_start"]["solver"], "Nnl1Admm");
    assert!(report["config"]["init"].get("Provided").is_some());
}

#[test]
fn malformed_input_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("A.csv");
    std::fs::write(&a, "1,2\n3,x\n").unwrap();
    let out = l1l2(&["solve", "--a", p(&a), "--b", p(&a)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
    assert!(!out.stderr.is_empty());

    let missing = l1l2(&[
        "solve",
        "--a",
        "/nonexistent/A.csv",
        "--b",
        "/nonexistent/b.csv",
    ]);
    assert_eq!(missing.status.code(), Some(1));
    assert_eq!(l1l2(&["solve", "--bogus"]).status.code(), Some(1));
    assert_eq!(
        l1l2(&["prox", "--q", "1,2", "--rho", "-1"]).status.code(),
        Some(1)
    );
}

#[test]
fn prox_command() {
    let out = l1l2(&["prox", "--q", "1,0.8", "--rho", "10"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["t"], 2);
    let x: Vec<f64> = serde_json::from_value(v["x"].clone()).unwrap();
    assert!((x[0] - 1.008223466).abs() < 1e-8 && (x[1] - 0.789498278).abs() < 1e-8);
}

#[test]
fn certify_commands() {
    let dir = tempfile::tempdir().unwrap();
    let b = dir.path().join("b.csv");
    std::fs::write(&b, "3\n4\n").unwrap();
    let out = l1l2(&["certify", "--check", "gammabound", "--b", p(&b), "--n", "4"]);
    assert!(out.status.success());
    assert_eq!(json(&out)["witness"].as_f64().unwrap(), 12.5);

    let a = dir.path().join("A.csv");
    std::fs::write(&a, "1,-1\n").unwrap();
    let out = l1l2(&[
        "certify",
        "--check",
        "ssp",
        "--a",
        p(&a),
        "--samples",
        "100",
    ]);
    let v = json(&out);
    let details = v["details"].as_str().unwrap();
    let ratio: f64 = details
        .split("ratio_min = ")
        .nth(1)
        .unwrap()
        .split_whitespace()
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!((ratio - 2f64.sqrt()).abs() < 1e-12);

    let out = l1l2(&["certify", "--check", "support", "--a", p(&a)]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn certify_support_of_solver_output() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(l1l2(&[
        "gen",
        "--m",
        "20",
        "--n",
        "50",
        "--s",
        "3",
        "--seed",
        "4",
        "--out-dir",
        p(d)
    ])
    .status
    .success());
    let report = d.join("report.json");
    let out = l1l2(&[
        "solve",
        "--a",
        p(&d.join("A.csv")),
        "--b",
        p(&d.join("b.csv")),
        "--out",
        p(&report),
    ]);
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&read(&report)).unwrap();
    let x: Vec<String> = v["x_final"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e.as_f64().unwrap().to_string())
        .collect();
    let xp = d.join("xhat.csv");
    std::fs::write(&xp, x.join("\n")).unwrap();
    let out = l1l2(&[
        "certify",
        "--check",
        "support",
        "--a",
        p(&d.join("A.csv")),
        "--x",
        p(&xp),
    ]);
    assert!(out.status.success());
    assert_eq!(json(&out)["verdict"], "Pass");
}

#[test]
fn config_file_supplies_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"q": [1, 0.8], "rho": 1.5}"#).unwrap();
    let from_file = json(&l1l2(&["prox", "--config", p(&cfg)]));
    let explicit = json(&l1l2(&["prox", "--q", "1,0.8", "--rho", "1.5"]));
    assert_eq!(from_file, explicit);

    let overridden = json(&l1l2(&["prox", "--config", p(&cfg), "--rho", "10"]));
    assert_eq!(
        overridden,
        json(&l1l2(&["prox", "--q", "1,0.8", "--rho", "10"]))
    );
    assert_ne!(overridden, from_file);
}

#[test]
fn bench_rows_and_rates() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("trials.csv");
    let out = l1l2(&[
        "bench",
        "--m",
        "10",
        "--n",
        "20",
        "--F",
        "1",
        "--sparsities",
        "1,2",
        "--trials",
        "3",
        "--solvers",
        "admm,nnl1",
        "--beta",
        "1",
        "--out-csv",
        p(&csv),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = read(&csv);
    assert_eq!(text.lines().count(), 1 + 2 * 3 * 2);
    assert!(text.starts_with("seed,m,n,s,solver,rerr,class"));
    let v = json(&out);
    for s in v["summaries"].as_array().unwrap() {
        let total = s["success_rate"].as_f64().unwrap()
            + s["model_failure_rate"].as_f64().unwrap()
            + s["algorithm_failure_rate"].as_f64().unwrap();
        assert!((total - 1.0).abs() < 1e-12);
    }
    let again = dir.path().join("again.csv");
    l1l2(&[
        "bench",
        "--m",
        "10",
        "--n",
        "20",
        "--F",
        "1",
        "--sparsities",
        "1,2",
        "--trials",
        "3",
        "--solvers",
        "admm,nnl1",
        "--beta",
        "1",
        "--out-csv",
        p(&again),
    ]);
    let strip = |t: &str| -> Vec<String> {
        t.lines()
            .map(|l| l.rsplit_once(',').unwrap().0.to_string())
            .collect()
    };
    assert_eq!(strip(&text), strip(&read(&again)));
}

#[test]
fn doas_small_instance() {
    let out = l1l2(&[
        "doas",
        "--samples",
        "128",
        "--k",
        "3",
        "--l",
        "3",
        "--solvers",
        "admm,nnl1",
        "--kmax-mult",
        "2",
    ]);
    assert!(matches!(out.status.code(), Some(0) | Some(2)));
    let v = json(&out);
    assert_eq!(v["rows"].as_array().unwrap().len(), 2);
    assert_eq!(v["truth_support"].as_array().unwrap().len(), 3);
}

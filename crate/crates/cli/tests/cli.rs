use std::path::Path;
use std::process::{Command, Output};

fn spinnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinnet"))
        .args(args)
        .output()
        .expect("spinnet runs")
}

fn stdout(args: &[&str]) -> String {
    let out = spinnet(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

/// Data rows as `column -> value` maps.
fn rows(text: &str) -> Vec<Vec<(String, String)>> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<String> = lines.next().unwrap().split(',').map(String::from).collect();
    lines
        .map(|l| header.iter().cloned().zip(l.split(',').map(String::from)).collect())
        .collect()
}

fn value(row: &[(String, String)], key: &str) -> f64 {
    row.iter().find(|(k, _)| k == key).unwrap().1.parse().unwrap()
}

#[test]
fn gap_sweep_two_spin_rows_coincide() {
    let text = stdout(&["sweep", "gap-vs-n", "--h", "0.1", "--n-min", "2", "--n-max", "10"]);
    let want = 0.29f64.sqrt() - 0.5;
    let n2: Vec<_> = rows(&text).into_iter().filter(|r| r[1].1 == "2").collect();
    assert_eq!(n2.len(), 2);
    for r in &n2 {
        assert!((value(r, "gap") - want).abs() < 1e-9);
    }
}

#[test]
fn t0_scaling_two_spin_row() {
    let text = stdout(&["t0-scaling", "--n-min", "2", "--n-max", "3"]);
    let r = &rows(&text)[0];
    assert_eq!(r[0].1, "bare");
    assert!((value(r, "F_Q") - 15.38462).abs() < 1e-5);
    assert!((value(r, "xi2") - 7.69231).abs() < 1e-5);
}

#[test]
fn dn_qfi_sweep_single_spin_row() {
    let text = stdout(&["sweep", "dn-qfi-vs-n", "--n-min", "1", "--n-max", "2", "--seed", "1", "--pop", "6", "--gens", "2"]);
    let r = &rows(&text)[0];
    assert!((value(r, "best_dn") - 0.0707107).abs() < 1e-7);
    assert!((value(r, "best_qfi") - 108.19).abs() < 0.01);
    assert_eq!(value(r, "first_hit_generation"), 0.0);
}

#[test]
fn exit_codes() {
    assert_eq!(spinnet(&["ga", "--n", "3"]).status.code(), Some(2));
    assert_eq!(spinnet(&["sweep", "no-such-kind"]).status.code(), Some(2));
    assert_eq!(spinnet(&["dn", "--n", "3", "--levels", "0"]).status.code(), Some(2));
    assert_eq!(spinnet(&["dn", "--n", "14"]).status.code(), Some(2));
    assert_eq!(spinnet(&["sweep", "t0-scaling", "--n-min", "5", "--n-max", "3"]).status.code(), Some(2));
    assert_eq!(spinnet(&["dn", "--graph", "/nonexistent/g.json"]).status.code(), Some(4));
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let out = blocker.join("sub.csv");
    assert_eq!(spinnet(&["gap", "--out", out.to_str().unwrap()]).status.code(), Some(4));
}

#[test]
fn graph_file_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("g.json");
    std::fs::write(&graph, r#"{"n": 3, "edges": [[0, 1], [1, 2]]}"#).unwrap();
    let out = dir.path().join("dn.csv");
    let status = spinnet(&["dn", "--graph", graph.to_str().unwrap(), "--out", out.to_str().unwrap()]).status;
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("# seed: none"));
    assert!(rows(&text)[0][1].1 == "0-1;1-2");
    let side: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("dn.json")).unwrap()).unwrap();
    assert_eq!(side["provenance"]["command"], "dn");
    assert_eq!(side["row_count"], 1);
    assert_eq!(side["provenance"]["params"]["physics"]["h"], 0.05);
}

#[test]
fn json_format_is_one_document() {
    let text = stdout(&["gap", "--n", "3", "--format", "json"]);
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(doc["columns"][2], "gap");
    assert_eq!(doc["rows"].as_array().unwrap().len(), 1);
}

#[test]
fn nn_train_then_predict() {
    let dir = tempfile::tempdir().unwrap();
    let series = dir.path().join("s.csv");
    std::fs::write(&series, "# from a sweep\nN,value\n1,0.1\n2,0.2\n3,0.3\n5,0.5\n").unwrap();
    let model = dir.path().join("m.json");
    let m = model.to_str().unwrap();
    let s = series.to_str().unwrap();
    let loss = stdout(&["nn-train", "--input", s, "--parity", "odd", "--epochs", "200", "--seed", "1", "--model", m]);
    assert_eq!(rows(&loss).len(), 200);
    let pred = stdout(&["nn-predict", "--model", m, "--n-min", "13", "--n-max", "17"]);
    let ns: Vec<f64> = rows(&pred).iter().map(|r| value(r, "N")).collect();
    assert_eq!(ns, vec![13.0, 15.0, 17.0]);
    assert_eq!(spinnet(&["nn-train", "--input", s, "--model", m]).status.code(), Some(2));
    assert!(Path::new(m).exists());
}

#[test]
fn fits_sweep_over_series() {
    let dir = tempfile::tempdir().unwrap();
    let series = dir.path().join("s.csv");
    let mut text = String::from("N,F\n");
    for n in 2..=9 {
        text.push_str(&format!("{n},{}\n", 3.0 * (n as f64).powf(1.5)));
    }
    std::fs::write(&series, text).unwrap();
    let out = stdout(&["sweep", "fits", "--input", series.to_str().unwrap()]);
    let power: Vec<_> = rows(&out).into_iter().filter(|r| r[0].1 == "power_law").collect();
    assert_eq!(power.len(), 3);
    for r in power {
        assert!((value(&r, "exponent") - 1.5).abs() < 1e-10);
    }
    let single = stdout(&["fit", "--input", series.to_str().unwrap(), "--fit", "poly", "--degree", "2"]);
    assert_eq!(rows(&single).len(), 1);
}

#[test]
fn ga_records_export() {
    let dir = tempfile::tempdir().unwrap();
    let rec = dir.path().join("records");
    let out = dir.path().join("sweep.csv");
    let status = spinnet(&[
        "sweep", "dn-qfi-vs-n", "--n-min", "1", "--n-max", "3", "--seed", "5", "--pop", "8", "--gens", "3",
        "--records", rec.to_str().unwrap(), "--out", out.to_str().unwrap(),
    ])
    .status;
    assert!(status.success());
    let agg = std::fs::read_to_string(rec.join("aggregate.csv")).unwrap();
    let r = rows(&agg);
    assert_eq!(r.len(), 3);
    assert!(r.iter().all(|row| value(row, "first_hit_generation") <= 3.0));
    assert_eq!(std::fs::read_dir(&rec).unwrap().count(), 4);
}

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn rigidity(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rigidity"))
        .args(args)
        .env_remove("RIGIDITY_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

#[test]
fn analyze_corpus_items() {
    let sq = json(&rigidity(&["analyze", "--corpus", "square"]));
    assert_eq!(sq["report"]["classification"], "first_order_rigid");
    assert!((num(&sq["report"]["eta2"]) - 0.16).abs() <= 0.005);

    let a = json(&rigidity(&["analyze", "--corpus", "example_a"]));
    assert_eq!(a["report"]["classification"], "prestress_stable");
    assert!((num(&a["report"]["eta2"]) / 0.014 - 1.0).abs() <= 0.1);
    assert!((num(&a["report"]["e_min_star"]) / 5.7e-6 - 1.0).abs() <= 0.1);

    let k = json(&rigidity(&["analyze", "--corpus", "k34_heptagon"]));
    assert!((num(&k["report"]["eta2"]) / 0.027 - 1.0).abs() <= 0.1);
}

#[test]
fn analyze_is_deterministic_and_text_matches_json() {
    let args = ["analyze", "--corpus", "example_h", "--verify", "50", "--seed", "9"];
    let a = rigidity(&args);
    let b = rigidity(&args);
    assert_eq!(a.stdout, b.stdout);
    let j = json(&a);

    let t = rigidity(&["analyze", "--corpus", "example_h", "--format", "text"]);
    let text = String::from_utf8(t.stdout).unwrap();
    for key in ["eta1", "eta2", "eta3", "e_min_star"] {
        let line = text.lines().find(|l| l.starts_with(key)).unwrap();
        let v: f64 = line.split_whitespace().nth(1).unwrap().parse().unwrap();
        assert_eq!(v, num(&j["report"][key]), "{key}");
    }
}

#[test]
fn analyze_file_with_out_and_pin_file() {
    let dir = tempfile::tempdir().unwrap();
    let fw = dir.path().join("a.json");
    let out = rigidity(&["corpus", "show", "example_a"]);
    fs::write(&fw, &out.stdout).unwrap();
    let pin = dir.path().join("pin.json");
    fs::write(&pin, "[1, 2, 7]").unwrap();
    let report = dir.path().join("sub/report.json");
    let o = rigidity(&[
        "analyze",
        fw.to_str().unwrap(),
        "--pin",
        pin.to_str().unwrap(),
        "--out",
        report.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["report"]["complement"], "pinned");
    assert_eq!(v["report"]["classification"], "prestress_stable");

    fs::write(&pin, "[1, 2, 3]").unwrap();
    let o = rigidity(&["analyze", fw.to_str().unwrap(), "--pin", pin.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("C not complementary to T"));
}

#[test]
fn bad_input_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let fw = dir.path().join("bad.json");
    fs::write(&fw, r#"{"dimension": 2, "vertices": [[0,0],[1,0]], "edges": [[0, 1]]}"#).unwrap();
    let o = rigidity(&["analyze", fw.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("1-based"));
    let o = rigidity(&["analyze", "--corpus", "nope"]);
    assert_eq!(o.status.code(), Some(1));
}

fn sweep(name: &str) -> Vec<(f64, f64)> {
    let o = rigidity(&["sweep-lambda", "--corpus", name]);
    assert!(o.status.success());
    let mut r = csv::Reader::from_reader(o.stdout.as_slice());
    assert_eq!(
        r.headers().unwrap().iter().collect::<Vec<_>>(),
        ["lambda_frac", "L", "kappa", "eta1", "eta2", "eta3", "e_min_star"]
    );
    r.records()
        .map(|rec| {
            let rec = rec.unwrap();
            (rec[0].parse().unwrap(), rec[1].parse().unwrap())
        })
        .collect()
}

#[test]
fn sweep_lambda_has_interior_maximum() {
    for (name, below) in [("example_a", 1.0), ("example_h", 0.2)] {
        let rows = sweep(name);
        assert_eq!(rows.len(), 49);
        let (arg, lmax) = rows.iter().copied().fold((0.0, 0.0), |m, r| if r.1 > m.1 { r } else { m });
        assert!(rows.iter().all(|r| r.1 > 0.0));
        assert!(rows[0].1 < lmax && rows[48].1 < lmax, "{name}");
        assert!(arg < below, "{name}: argmax {arg}");
    }
}

fn export(dir: &Path) {
    let o = rigidity(&["corpus", "export", dir.to_str().unwrap()]);
    assert!(o.status.success());
}

#[test]
fn scan_corpus_with_one_malformed_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in");
    export(&input);
    fs::write(input.join("zz_broken.json"), "{ not json").unwrap();
    let out = dir.path().join("out");
    let o = Command::new(env!("CARGO_BIN_EXE_rigidity"))
        .args(["scan", input.to_str().unwrap(), "--parallel", "2"])
        .env("RIGIDITY_OUTPUT_DIR", &out)
        .output()
        .unwrap();
    let agg = json(&o);
    assert_eq!(agg["files"], 9);
    assert_eq!(agg["completed"], 8);
    assert_eq!(agg["failed"], serde_json::json!(["zz_broken.json"]));
    assert_eq!(agg["d_at_least_half"], 0);
    assert!(out.join("summary.csv").exists());
    assert!(out.join("example_a.report.json").exists());
    let csv = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(csv.lines().any(|l| l.starts_with("zz_broken.json,error")));
}

#[test]
fn scan_empty_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = rigidity(&["scan", dir.path().to_str().unwrap(), "--out-dir", out.to_str().unwrap()]);
    let agg = json(&o);
    assert_eq!(agg["files"], 0);
    assert_eq!(agg["classifications"], serde_json::json!({}));
}

#[test]
fn perturb_writes_frozen_columns() {
    let o = rigidity(&["perturb", "--corpus", "example_h", "--delta-list", "1e-10,1e-8", "--trials", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut r = csv::Reader::from_reader(o.stdout.as_slice());
    assert_eq!(
        r.headers().unwrap().iter().collect::<Vec<_>>(),
        ["delta", "trial", "eta1", "eta2", "eta3", "e_min_star", "D", "D_pss", "classification"]
    );
    assert_eq!(r.records().count(), 6);
}

#[test]
fn tensegrity_reports() {
    let s = json(&rigidity(&["tensegrity", "--corpus", "snelson_x"]));
    assert_eq!(s["prestress_stable"], true);
    assert!(num(&s["certificate"]["s"]) > 0.0);
    assert_eq!(s["exit_status"], 0);

    let c = rigidity(&["tensegrity", "--corpus", "cable_triangle"]);
    let cj = json(&c);
    assert_eq!(cj["certificate"]["certificate"]["status"], "no_stress");
    assert_eq!(cj["exit_status"], 1);

    // Without labels the command is the plain analysis.
    let a = rigidity(&["analyze", "--corpus", "square"]);
    let t = rigidity(&["tensegrity", "--corpus", "square"]);
    assert_eq!(a.stdout, t.stdout);
}

#[test]
fn corpus_list_names_everything() {
    let o = rigidity(&["corpus", "list"]);
    let s = String::from_utf8(o.stdout).unwrap();
    for name in ["example_a", "square", "tetrahedron", "octahedron", "example_h", "k34_heptagon", "snelson_x", "cable_triangle"] {
        assert!(s.lines().any(|l| l.starts_with(name)), "{name}");
    }
}

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn sbd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sbd")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn transform_four_node_report() {
    let v = json(&sbd(&["transform", "--input", path(&data("four_node.edges"))]));
    assert_eq!(v["block_sizes"], serde_json::json!([2, 2]));
    assert_eq!(v["p1"], 18);
    assert_eq!(v["p2"], 6);
    assert_eq!(v["residuals"]["pass"], true);
    assert_eq!(v["meta"]["seed"], 0);
    assert_eq!(v["meta"]["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["meta"]["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn regular_graph_gets_degenerate_note() {
    let v = json(&sbd(&["partition", "--input", path(&data("k4.edges"))]));
    assert_eq!(v["C"], 1);
    assert!(v["note"].as_str().unwrap().contains("plain SBD"));
    let v = json(&sbd(&["partition", "--input", path(&data("four_node.edges"))]));
    assert_eq!(v["C"], 2);
    assert!(v.get("note").is_none());
    assert_eq!(v["cells"], serde_json::json!([["1", "2"], ["3", "4"]]));
}

#[test]
fn empty_bench_is_header_only() {
    let out = sbd(&["bench"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows, ["name,N,E,N_ntc,max_cluster,t_baseline_s,t_canonical_s,blocks_agree"]);
    assert!(text.starts_with("# tool=sbd"));
}

#[test]
fn bench_on_edge_list_instance() {
    let inst = format!("{}:{}", path(&data("ten_node.edges")), path(&data("ten_node.orbital.cells")));
    let out = sbd(&["bench", "--instance", &inst]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let row = text.lines().find(|l| l.starts_with("ten_node,")).unwrap();
    let cols: Vec<&str> = row.split(',').collect();
    assert_eq!(&cols[1..5], ["10", "12", "3", "4"]);
    assert_eq!(cols[7], "true");
}

#[test]
fn exit_codes() {
    let out = sbd(&["partition", "--input", "/nonexistent/net.edges"]);
    assert_eq!(out.status.code(), Some(2));
    let out = sbd(&["partition", "--input", path(&data("four_node.edges")), "--bogus"]);
    assert_eq!(out.status.code(), Some(1));
    let out = sbd(&["transform", "--input", path(&data("four_node.edges")), "--tol-rel", "0"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn non_equitable_cells_error_json() {
    let dir = tempfile::tempdir().unwrap();
    let cells = dir.path().join("bad.cells");
    std::fs::write(&cells, "1 2 3\n4\n").unwrap();
    let out = sbd(&["partition", "--input", path(&data("four_node.edges")), "--cells", path(&cells), "--error-json"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    let line = err.lines().find(|l| l.starts_with('{')).expect("error json");
    let v: Value = serde_json::from_str(line).unwrap();
    assert_eq!(v["error"], "not_equitable");
    assert_eq!(v["exit_code"], 1);
    assert!(v["witness"]["cell"].is_u64());
}

#[test]
fn reruns_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let out = sbd(&[
            "pipeline",
            "--input",
            path(&data("eight_node.edges")),
            "--cells",
            path(&data("eight_node.orbital.cells")),
            "--dynamics",
            "linear",
            "--dyn-param",
            "a=0.2",
            "--t-end",
            "5",
            "--seed",
            "3",
            "--out",
            path(d.path()),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for f in ["partition.json", "block_report.json", "T.csv", "B.csv", "T_triplets.txt", "B_triplets.txt", "sts_tail.csv", "exponents.csv"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        assert_eq!(x, y, "{f}");
    }
    let ex = std::fs::read_to_string(a.path().join("exponents.csv")).unwrap();
    assert!(ex.lines().any(|l| l == "block,class,size,max_exponent,exponents"));
    assert!(ex.contains("seed=3"));
}

#[test]
fn pipeline_needs_out() {
    let out = sbd(&["pipeline", "--input", path(&data("four_node.edges")), "--dynamics", "linear"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sensitivity_eleven_node() {
    let v = json(&sbd(&[
        "sensitivity",
        "--input",
        path(&data("eleven_node.edges")),
        "--cells",
        path(&data("eleven_node.coarsest.cells")),
        "--param",
        "q1:1,8=1",
        "--param",
        "q2:5,10=1",
    ]));
    assert_eq!(v["overlaps"]["q1|q2"], 0);
    assert_eq!(v["params"][0]["param"], "q1");
    assert!(!v["params"][0]["entries"].as_array().unwrap().is_empty());
    let out = sbd(&["sensitivity", "--input", path(&data("eleven_node.edges")), "--param", "q:1,2=1"]);
    assert_eq!(out.status.code(), Some(1));
    let out = sbd(&["sensitivity", "--input", path(&data("eleven_node.edges")), "--param", "q+:1,2=1"]);
    assert!(out.status.success());
}

#[test]
fn zero_based_input() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("p.edges");
    std::fs::write(&f, "0 1\n1 2\n").unwrap();
    let v = json(&sbd(&["partition", "--input", path(&f), "--base", "0"]));
    assert_eq!(v["cells"], serde_json::json!([["0", "2"], ["1"]]));
    let out = sbd(&["partition", "--input", path(&f), "--base", "2"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn stability_linear_exponents() {
    let out = sbd(&["stability", "--input", path(&data("path3.edges")), "--dynamics", "linear", "--t-end", "50"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    // transverse block of the path is x1 − x3 with B = 0, so its exponent is a
    let row = text.lines().find(|l| l.contains("transverse")).unwrap();
    let max: f64 = row.split(',').nth(3).unwrap().parse().unwrap();
    assert!((max - 0.1).abs() < 1e-6, "{row}");
    let out = sbd(&["stability", "--input", path(&data("path3.edges")), "--dynamics", "nope"]);
    assert_eq!(out.status.code(), Some(1));
}

use std::path::Path;
use std::process::{Command, Output};

use rieszlab::io;
use rieszlab::report::Report;

fn rieszlab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rieszlab"))
        .current_dir(dir)
        .env("RIESZLAB_THREADS", "1")
        .args(args)
        .output()
        .expect("spawn")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = rieszlab(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn gasket(dir: &Path) {
    ok(dir, &["build", "--family", "sierpinski:3", "--out", "g.txt"]);
}

fn write_inputs(dir: &Path, n: usize) {
    let f: Vec<f64> = (0..n).map(|i| ((i * 7919) % 13) as f64 / 13.0 - 0.4).collect();
    io::write_function(&dir.join("f.csv"), &f).unwrap();
    let mut tent = String::from("vertex,k,value\n");
    for x in 0..n {
        for k in 1..=3 {
            tent.push_str(&format!("{x},{k},{}\n", ((x + 2 * k) % 5) as f64 - 2.0));
        }
    }
    std::fs::write(dir.join("t.csv"), tent).unwrap();
}

#[test]
fn build_writes_graph_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    gasket(dir.path());
    let side: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("g.txt.json")).unwrap()).unwrap();
    assert_eq!(side["family"], "sierpinski:3");
    assert_eq!(side["vertices"], 42);
    assert!((side["epsilon_lb"].as_f64().unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn kernel_rows_conserve_mass() {
    let dir = tempfile::tempdir().unwrap();
    gasket(dir.path());
    ok(dir.path(), &["kernel", "--graph", "g.txt", "--source", "5", "--steps", "12", "--out", "k.csv"]);
    let mut r = csv::Reader::from_path(dir.path().join("k.csv")).unwrap();
    let mut rows = 0;
    for rec in r.records() {
        let rec = rec.unwrap();
        let mass: f64 = rec[3].parse().unwrap();
        assert!((mass - 1.0).abs() < 1e-12);
        rows += 1;
    }
    assert_eq!(rows, 13 * 42);
    assert_eq!(rieszlab(dir.path(), &["kernel", "--graph", "g.txt", "--source", "99", "--steps", "1", "--out", "x.csv"]).status.code(), Some(1));
}

#[test]
fn transforms_and_functionals_write_csv() {
    let dir = tempfile::tempdir().unwrap();
    gasket(dir.path());
    write_inputs(dir.path(), 42);
    ok(dir.path(), &["riesz", "--graph", "g.txt", "--input", "f.csv", "--out", "form.csv"]);
    let form = std::fs::read_to_string(dir.path().join("form.csv")).unwrap();
    assert!(form.starts_with("x,y,F\n"));
    for (kind, input) in [("l", "f.csv"), ("g", "f.csv"), ("m", "f.csv"), ("a", "t.csv"), ("c", "t.csv")] {
        let out = format!("{kind}.csv");
        ok(dir.path(), &["functional", "--graph", "g.txt", "--kind", kind, "--input", input, "--out", &out]);
        let values = io::read_function(&dir.path().join(&out), 42).unwrap();
        assert!(values.iter().all(|v| v.is_finite() && *v >= 0.0), "{kind}");
    }
}

#[test]
fn decompose_lists_certified_pieces() {
    let dir = tempfile::tempdir().unwrap();
    gasket(dir.path());
    write_inputs(dir.path(), 42);
    ok(dir.path(), &["decompose", "--graph", "g.txt", "--input", "f.csv", "--beta", "1", "--eps", "1", "--out", "d.json"]);
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("d.json")).unwrap()).unwrap();
    assert!(doc["relative_residual"].as_f64().unwrap() <= 1e-6);
    let pieces = doc["pieces"].as_array().unwrap();
    assert!(!pieces.is_empty());
    for p in pieces {
        assert_eq!(p["certificate"]["valid"], true);
        assert!(p["ball"]["radius"].as_f64().unwrap() > 0.0);
    }
}

#[test]
fn experiment_reports_are_reproducible_and_plottable() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["build", "--family", "lattice:2:21", "--out", "z.txt"]);
    std::fs::write(d.join("p.json"), r#"{"ks": [2, 4, 8, 16, 32], "margin": 1.0}"#).unwrap();
    for out in ["a.json", "b.json"] {
        ok(d, &["fit-diagonal", "--graph", "z.txt", "--params", "p.json", "--target", "-1", "--out", out]);
    }
    let a = Report::read(&d.join("a.json")).unwrap();
    let b = Report::read(&d.join("b.json")).unwrap();
    assert_eq!(a.canonical(), b.canonical());
    assert_eq!(a.parameters["ks"].as_array().unwrap().len(), 5);
    assert!(a.verdict("slope").unwrap().passed);

    let out = ok(d, &["report", "--input", "a.json", "--csv-dir", "tables", "--svg", "p.svg", "--x", "k", "--y", "p_2k"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("PASS slope"));
    assert!(d.join("tables/diagonal.csv").exists());
    assert!(std::fs::read_to_string(d.join("p.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn stochastic_commands_take_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    gasket(d);
    std::fs::write(d.join("p.json"), r#"{"samples": 5, "k_max": 5, "p_list": [1.5]}"#).unwrap();
    for (seed, out) in [("1", "a.json"), ("1", "b.json"), ("2", "c.json")] {
        let o = rieszlab(d, &["verify-pseudo", "--graph", "g.txt", "--params", "p.json", "--seed", seed, "--out", out]);
        assert!(o.status.code().unwrap() <= 2);
    }
    let read = |f: &str| Report::read(&d.join(f)).unwrap().canonical();
    assert_eq!(read("a.json"), read("b.json"));
    assert_eq!(read("c.json").seed, Some(2));
    assert_ne!(read("a.json").tables, read("c.json").tables);
}

#[test]
fn negative_control_flag_marks_expected_failures() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["build", "--family", "lattice:2:41", "--out", "z.txt"]);
    std::fs::write(d.join("p.json"), r#"{"ks": [4, 8, 16, 32], "n_list": [0, 2]}"#).unwrap();
    ok(d, &["verify-ue", "--graph", "z.txt", "--params", "p.json", "--out", "r.json"]);
    assert!(Report::read(&d.join("r.json")).unwrap().all_as_expected());

    // Overstating beta shrinks V(x,k) and the constants decay with k.
    ok(
        d,
        &["verify-ue", "--graph", "z.txt", "--params", "p.json", "--declare-beta", "4", "--negative-control", "--out", "n.json"],
    );
    let report = Report::read(&d.join("n.json")).unwrap();
    assert!(report.verdicts.iter().all(|v| !v.expect_pass && !v.passed));
}

#[test]
fn bad_input_exits_with_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = rieszlab(dir.path(), &["build", "--family", "torus:3", "--out", "g.txt"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown family"));
    let out = rieszlab(dir.path(), &["kernel", "--graph", "missing.txt", "--source", "0", "--steps", "1", "--out", "k.csv"]);
    assert_eq!(out.status.code(), Some(1));
}

use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn octonahm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_octonahm")).args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr_line(out: &Output) -> String {
    let s = String::from_utf8_lossy(&out.stderr).to_string();
    assert_eq!(s.trim_end().lines().count(), 1, "expected a one-line message, got {s:?}");
    s
}

fn write(dir: &Path, name: &str, v: &Value) -> String {
    let p = dir.join(name);
    std::fs::write(&p, v.to_string()).unwrap();
    p.to_str().unwrap().to_string()
}

fn real(m: &[[f64; 2]; 2]) -> Value {
    json!(m.iter().map(|r| r.iter().map(|&x| [x, 0.0]).collect::<Vec<_>>()).collect::<Vec<_>>())
}

/// `ξ = (−σ₁, −σ₂, −σ₃, 0, 0, 0, 0)` with `σⱼ = −(i/2)·Pauliⱼ`.
fn su2_init() -> Value {
    let z = json!([[[0, 0], [0, 0]], [[0, 0], [0, 0]]]);
    json!({ "xi": [
        [[[0.0, 0.0], [0.0, 0.5]], [[0.0, 0.5], [0.0, 0.0]]],
        [[[0.0, 0.0], [0.5, 0.0]], [[-0.5, 0.0], [0.0, 0.0]]],
        [[[0.0, 0.5], [0.0, 0.0]], [[0.0, 0.0], [0.0, -0.5]]],
        z, z, z, z
    ]})
}

#[test]
fn tables_lists_the_seven_signed_triples() {
    let v = stdout_json(&octonahm(&["tables"]));
    let labels: Vec<&str> = v["triples"].as_array().unwrap().iter().map(|t| t["label"].as_str().unwrap()).collect();
    assert_eq!(labels, ["123", "145", "167", "246", "-257", "-347", "-356"]);
    assert_eq!(v["f"][1][4][6], json!(-1));
    assert_eq!(v["complex_structures"].as_array().unwrap().len(), 7);
}

#[test]
fn ratmap_k1_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let b = write(dir.path(), "b.json", &json!([[[0.5, -0.25]]]));
    let w = write(dir.path(), "w.json", &json!([[1.0, 0.0]]));
    let v = stdout_json(&octonahm(&["ratmap", "--B", &b, "--w", &w]));
    assert_eq!(v, json!({ "p": [[1.0, 0.0]], "q": [[-0.5, 0.25], [1.0, 0.0]] }));
}

#[test]
fn integrate_detects_blow_up_and_writes_deterministic_csv() {
    let dir = tempfile::tempdir().unwrap();
    let init = write(dir.path(), "init.json", &su2_init());
    let out = dir.path().join("blow.csv");
    let v = stdout_json(&octonahm(&[
        "integrate", "--group", "su2", "--init", &init, "--T", "1.2", "--grid", "600", "--out", out.to_str().unwrap(),
    ]));
    assert_eq!(v["status"], "blow_up");
    assert!((v["t_star"].as_f64().unwrap() - 1.0).abs() < 1e-2);

    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let v = stdout_json(&octonahm(&[
            "integrate", "--group", "su2", "--init", &init, "--T", "0.5", "--grid", "200", "--out", p.to_str().unwrap(),
        ]));
        assert_eq!(v["status"], "complete");
    }
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    let first = String::from_utf8(ta).unwrap();
    let row = first.lines().nth(1).unwrap();
    // 17 significant digits: one leading digit and 16 after the point.
    assert!(row.split(',').all(|f| f.trim_start_matches('-').split('e').next().unwrap().len() == 18), "{row}");

    let r = stdout_json(&octonahm(&["residual", "--in", a.to_str().unwrap()]));
    let rows: Vec<f64> = r["rows"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert!(rows[..3].iter().all(|&x| x < 1e-3), "{rows:?}");
    assert!(rows[3..].iter().all(|&x| x == 0.0));

    let m = dir.path().join("m.json");
    let out = octonahm(&["moment", "--in", a.to_str().unwrap(), "--out", m.to_str().unwrap()]);
    assert!(out.status.success());
    let mv: Value = serde_json::from_slice(&std::fs::read(&m).unwrap()).unwrap();
    assert_eq!(mv["sup_norms"], r["rows"]);
}

#[test]
fn integrate_rejects_group_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let init = write(dir.path(), "init.json", &su2_init());
    let out = octonahm(&["integrate", "--group", "su2", "--k", "3", "--init", &init, "--out", "x.csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_line(&out).contains("--k 3"));
}

#[test]
fn kempf_ness_round_trip_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let triple = json!({
        "g": [[[1.0, 0.0], [0.2, 0.1]], [[0.0, 0.0], [1.5, 0.0]]],
        "t1": real(&[[0.3, 0.0], [0.0, -0.3]]),
        "t2": [[[0.0, 0.2], [0.0, 0.0]], [[0.0, 0.0], [0.0, -0.2]]],
        "t3": real(&[[0.1, 0.0], [0.0, 0.4]]),
    });
    let t = write(dir.path(), "triple.json", &triple);
    let csv = dir.path().join("kn.csv");
    let out = octonahm(&["kempf-ness", "--triple", &t, "--k", "2", "--grid", "200", "--out", csv.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rep: Value = serde_json::from_slice(&std::fs::read(csv.with_extension("json")).unwrap()).unwrap();
    assert!(rep["residuals"]["f_hat_sup"].as_f64().unwrap() <= 1e-8);
    assert!(rep["theta_round_trip"]["g_star_g"].as_f64().unwrap() < 1e-6);
    assert!(rep["lagrangian"].as_f64().unwrap() > 0.0);
    let header = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(header.lines().next().unwrap().split(',').count(), 1 + 4 * 8);

    // Below the roundoff floor the solver stalls: a numerical failure.
    let out = octonahm(&["kempf-ness", "--triple", &t, "--grid", "64", "--tol", "1e-15", "--out", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_line(&out).contains("numerical failure"));

    let mut noncommuting = triple.clone();
    noncommuting["t2"] = real(&[[0.0, 1.0], [0.0, 0.0]]);
    let t = write(dir.path(), "bad.json", &noncommuting);
    let out = octonahm(&["kempf-ness", "--triple", &t, "--out", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    stderr_line(&out);
}

#[test]
fn classify_recovers_the_rational_maps() {
    let dir = tempfile::tempdir().unwrap();
    let b1 = [[0.1, 0.5], [0.5, 0.3]];
    let affine = |g: f64, c: f64| {
        let mut m = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] = g * b1[i][j] + if i == j { c } else { 0.0 };
            }
        }
        m
    };
    let quad = json!({ "B1": real(&b1), "B2": real(&affine(2.0, 0.5)), "B3": real(&affine(-1.0, 0.2)), "w": [[1, 0], [0, 0]] });
    let q = write(dir.path(), "quad.json", &quad);
    let out_dir = dir.path().join("out");
    let out = octonahm(&["classify", "--quadruple", &q, "--eps", "0.02", "--grid", "1000", "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["complex.csv", "residues.json", "maps.json", "report.json"] {
        assert!(out_dir.join(f).exists(), "{f}");
    }
    let maps: Value = serde_json::from_slice(&std::fs::read(out_dir.join("maps.json")).unwrap()).unwrap();
    assert!(maps["max_distance"].as_f64().unwrap() < 1e-6);
    let res: Value = serde_json::from_slice(&std::fs::read(out_dir.join("residues.json")).unwrap()).unwrap();
    assert!((res["weight_sum"].as_f64().unwrap() - 1.0).abs() < 1e-6);

    let mut bad = quad.clone();
    bad["B2"] = real(&[[0.0, 1.0], [0.0, 0.0]]);
    let q = write(dir.path(), "bad.json", &bad);
    let out = octonahm(&["classify", "--quadruple", &q, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_line(&out).contains("not a Nahm quadruple"));
}

#[test]
fn witness_on_su2_instance() {
    let v = stdout_json(&octonahm(&["witness"]));
    assert!(v["witness_norm"].as_f64().unwrap() >= 0.1);
}

#[test]
fn input_errors_exit_with_code_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = octonahm(&["tables", "--bogus"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_line(&out).contains("--bogus"));

    let out = octonahm(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(1));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let w = write(dir.path(), "w.json", &json!([[1.0, 0.0]]));
    let out = octonahm(&["ratmap", "--B", bad.to_str().unwrap(), "--w", &w]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_line(&out).contains("malformed"));

    let b = write(dir.path(), "b.json", &json!([[[1, 0], [0, 0]], [[0, 0], [1, 0]]]));
    let out = octonahm(&["ratmap", "--B", &b, "--w", &w]);
    assert_eq!(out.status.code(), Some(1));
    stderr_line(&out);

    let out = octonahm(&["tables", "--tol=0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_line(&out).contains("positive"));

    let out = octonahm(&["selftest", "--only", "13"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn selftest_subset_passes() {
    let out = octonahm(&["selftest", "--only", "1,3,11"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("[PASS]")).count(), 3);
    assert!(text.contains("3 of 3 criteria passed"));
}

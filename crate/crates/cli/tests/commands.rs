use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use tempfile::TempDir;

struct Run {
    code: i32,
    stdout: String,
}

impl Run {
    fn kv(&self) -> HashMap<String, String> {
        self.stdout
            .lines()
            .filter_map(|l| l.split_once('='))
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }

    fn get(&self, key: &str) -> String {
        self.kv().remove(key).unwrap_or_else(|| panic!("no {key} in\n{}", self.stdout))
    }

    fn num(&self, key: &str) -> f64 {
        self.get(key).parse().unwrap()
    }

    /// Rows following the CSV header `header`.
    fn csv(&self, header: &str) -> Vec<Vec<String>> {
        self.stdout
            .lines()
            .skip_while(|l| *l != header)
            .skip(1)
            .take_while(|l| !l.contains('='))
            .map(|l| l.split(',').map(str::to_string).collect())
            .collect()
    }
}

fn run(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_diagonals")).args(args).output().unwrap();
    Run {
        code: out.status.code().unwrap(),
        stdout: String::from_utf8(out.stdout).unwrap(),
    }
}

fn write(dir: &TempDir, name: &str, value: serde_json::Value) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, value.to_string()).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn interleaved(prefix: &[f64]) -> serde_json::Value {
    json!({
        "prefix": prefix,
        "tail": {"kind": "Interleave", "parts": [
            {"kind": "GeometricLow", "c": 0.5, "r": 0.5},
            {"kind": "GeometricHigh", "c": 0.5, "r": 0.5}
        ]}
    })
}

#[test]
fn majorize_verdicts() {
    let d = TempDir::new().unwrap();
    let half = write(&d, "h.json", json!({"values": [0.5, 0.5, 0.5, 0.5]}));
    let flag = write(&d, "f.json", json!({"values": [1, 1, 0, 0]}));
    let r = run(&["majorize", s(&half), s(&flag)]);
    assert_eq!(r.code, 0);
    assert_eq!(r.get("verdict"), "true");
    assert!(r.csv("k,slack").iter().all(|row| row[1].parse::<f64>().unwrap() >= 0.0));

    let r = run(&["majorize", s(&half), s(&half)]);
    assert_eq!((r.code, r.get("verdict")), (0, "true".into()));

    let a = write(&d, "a.json", json!({"values": [3, 1]}));
    let b = write(&d, "b.json", json!({"values": [2, 2]}));
    let r = run(&["majorize", s(&a), s(&b)]);
    assert_eq!(r.code, 1);
    assert_eq!(r.get("verdict"), "false");
    assert_eq!(r.num("defect"), 1.0);
}

#[test]
fn malformed_input_exits_2() {
    let d = TempDir::new().unwrap();
    let bad = write(&d, "bad.json", json!({"vals": [1]}));
    let good = write(&d, "g.json", json!({"values": [1]}));
    assert_eq!(run(&["majorize", s(&bad), s(&good)]).code, 2);
    assert_eq!(run(&["verify", "/nonexistent/m.json"]).code, 2);
    assert_eq!(run(&["nonsense"]).code, 2);
    let spec = write(&d, "s.json", json!({"prefix": [2.0], "tail": {"kind": "ZeroTail"}}));
    assert_eq!(run(&["obstruction", s(&spec)]).code, 2);
    let short = write(&d, "m.json", json!({"n": 2, "data": [[1, 0]]}));
    assert_eq!(run(&["verify", s(&short)]).code, 2);
}

#[test]
fn synth_files_pass_verify() {
    let d = TempDir::new().unwrap();
    let x = write(&d, "x.json", json!({"values": [2, 2]}));
    let y = write(&d, "y.json", json!({"values": [3, 1]}));
    let (a, u) = (d.path().join("A.json"), d.path().join("U.json"));
    let r = run(&["synth", s(&x), s(&y), "--out-a", s(&a), "--out-u", s(&u)]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    assert_eq!(run(&["verify", s(&a), "--expect", "hermitian"]).code, 0);
    assert_eq!(run(&["verify", s(&u), "--expect", "unitary"]).code, 0);

    let r = run(&["synth", s(&y), s(&x)]);
    assert_eq!(r.code, 1);
    assert!(r.num("defect") > 0.0);
}

#[test]
fn synth_random_pairs_within_tolerance() {
    let d = TempDir::new().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..5 {
        let n = rng.gen_range(2..7);
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        // averages of y are majorised by y
        let mean = y.iter().sum::<f64>() / n as f64;
        let w = rng.gen::<f64>();
        let x: Vec<f64> = y.iter().map(|v| w * v + (1.0 - w) * mean).collect();
        let xp = write(&d, &format!("x{case}.json"), json!({"values": x}));
        let yp = write(&d, &format!("y{case}.json"), json!({"values": y}));
        let r = run(&["synth", s(&xp), s(&yp)]);
        assert_eq!(r.code, 0);
        for key in ["hermitian_residual", "unitary_residual", "diagonal_residual"] {
            assert!(r.num(key) <= 1e-10, "{key}: {}", r.stdout);
        }
    }
}

#[test]
fn carpenter_finite_writes_projection() {
    let d = TempDir::new().unwrap();
    let v = write(&d, "v.json", json!({"values": [0.5, 0.5]}));
    let p = d.path().join("P.json");
    let r = run(&["carpenter", s(&v), "--out", s(&p)]);
    assert_eq!(r.code, 0);
    assert_eq!(r.get("case"), "CaseB-feasible");
    assert!((r.num("trace") - 1.0).abs() < 1e-12);
    let r = run(&["verify", s(&p), "--expect", "projection,hermitian"]);
    assert_eq!(r.code, 0);
    assert_eq!(r.get("schur_check"), "true");

    let odd = write(&d, "o.json", json!({"values": [0.5, 0.25]}));
    let r = run(&["carpenter", s(&odd)]);
    assert_eq!(r.code, 1);
    assert_eq!(r.num("defect"), 0.25);
}

#[test]
fn carpenter_series_and_bound_table() {
    let d = TempDir::new().unwrap();
    let spec = write(&d, "s.json", interleaved(&[]));
    let out = d.path().join("series");
    let r = run(&["--human", "carpenter", s(&spec), "--depth", "6", "--out", s(&out)]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    assert_eq!(r.get("case"), "CaseB-feasible");
    assert!(r.stdout.lines().any(|l| l.starts_with("# ")));
    let rows = r.csv("k,bound,observed_max_residual");
    assert_eq!(rows.len(), 6);
    for row in &rows {
        let bound: f64 = row[1].parse().unwrap();
        let observed: f64 = row[2].parse().unwrap();
        assert!(observed <= bound + 1e-9, "{row:?}");
    }
    for k in 1..=6 {
        let m = out.join(format!("P_{k:02}.json"));
        assert_eq!(run(&["verify", s(&m), "--expect", "projection"]).code, 0);
        let meta: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out.join(format!("P_{k:02}.meta.json"))).unwrap()).unwrap();
        assert_eq!(meta["depth"], k);
        assert!(meta["residual_bound"].as_f64().unwrap() > 0.0);
    }
}

#[test]
fn carpenter_infeasible_sequence() {
    let d = TempDir::new().unwrap();
    let spec = write(&d, "s.json", interleaved(&[0.5]));
    let r = run(&["carpenter", s(&spec)]);
    assert_eq!(r.code, 1);
    assert_eq!(r.get("case"), "Infeasible");
    assert!((r.num("defect") - 0.5).abs() < 1e-12);
}

#[test]
fn carpenter_divergent_case() {
    let d = TempDir::new().unwrap();
    let spec = write(
        &d,
        "s.json",
        json!({"prefix": [], "tail": {"kind": "DivergentLow", "generator": "0.5",
               "certificate": {"kind": "constant", "p": 0.5}}}),
    );
    let out = d.path().join("a");
    let r = run(&["carpenter", s(&spec), "--depth", "3", "--out", s(&out)]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    assert_eq!(r.get("case"), "CaseA");
    assert!(r.num("diagonal_mismatch") <= 1e-9);
    assert_eq!(run(&["verify", s(&out.join("P_03.json")), "--expect", "projection"]).code, 0);
}

#[test]
fn verify_predicates() {
    let d = TempDir::new().unwrap();
    let id = write(&d, "i.json", json!({"n": 2, "data": [[1, 0], [0, 0], [0, 0], [1, 0]]}));
    let r = run(&["verify", s(&id), "--expect", "hermitian,unitary,projection"]);
    assert_eq!(r.code, 0);
    assert_eq!(r.get("schur_check"), "true");

    let half = write(&d, "h.json", json!({"n": 2, "data": [[0.5, 0], [0.5, 0], [0.5, 0], [0.5, 0]]}));
    let r = run(&["verify", s(&half), "--expect", "projection"]);
    assert_eq!((r.code, r.get("is_projection")), (0, "true".into()));
    assert_eq!(r.get("schur_check"), "true");

    let skew = write(&d, "k.json", json!({"n": 2, "data": [[0, 0], [1, 0], [0, 0], [0, 0]]}));
    let r = run(&["verify", s(&skew), "--expect", "projection"]);
    assert_eq!(r.code, 1);
    assert_eq!(r.get("is_hermitian"), "false");
}

#[test]
fn obstruction_is_alpha_independent() {
    let d = TempDir::new().unwrap();
    let cases = [
        (interleaved(&[]), "CaseB-feasible", 0.0),
        (interleaved(&[0.5]), "Infeasible", 0.5),
        (json!({"prefix": [], "tail": {"kind": "GeometricHigh", "c": 0.5, "r": 0.5}}), "Infeasible", 0.5),
    ];
    for (i, (spec, case, defect)) in cases.into_iter().enumerate() {
        let p = write(&d, &format!("s{i}.json"), spec);
        let r = run(&["obstruction", s(&p), "--alpha", "0.3,0.5,0.7"]);
        assert_eq!(r.code, 0);
        assert_eq!(r.get("alpha_agreement"), "true");
        let rows = r.csv("alpha,a_f,b_f,defect,case");
        assert_eq!(rows.len(), 3);
        for row in rows {
            assert_eq!(row[4], case);
            assert!((row[3].parse::<f64>().unwrap() - defect).abs() < 1e-12);
        }
    }
}

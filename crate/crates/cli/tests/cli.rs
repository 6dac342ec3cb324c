use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use brunovsky::document::from_rows;
use brunovsky::{
    build_transformations, compose_transforms, default_parameters, index_summary, reduce_to_staircase,
    SystemDocument,
};
use nalgebra::DMatrix;
use serde_json::Value;
use tempfile::TempDir;

fn brunovsky() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_brunovsky"));
    cmd.env_remove("BRUNOVSKY_OUT_DIR");
    cmd
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

const BENIGN: &str = r#"{"n": 4, "m": 2,
  "A": [[0.3, -1.2, 0.5, 0.8], [1.1, 0.4, -0.7, 0.2], [-0.6, 0.9, 0.1, -1.3], [0.2, -0.4, 1.5, 0.6]],
  "B": [[1.0, 0.3], [-0.5, 0.8], [0.7, -1.1], [0.2, 0.4]]}"#;

const BRUNOVSKY_PAIR: &str = r#"{"n": 3, "m": 1, "A": [[0,1,0],[0,0,1],[0,0,0]], "B": [[0],[0],[1]]}"#;

const UNCONTROLLABLE: &str = r#"{"n": 2, "m": 1, "A": [[1,0],[0,2]], "B": [[1],[0]]}"#;

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn matrix(v: &Value) -> DMatrix<f64> {
    let rows: Vec<Vec<f64>> = serde_json::from_value(v.clone()).unwrap();
    let (r, c) = (rows.len(), rows.first().map_or(0, Vec::len));
    from_rows(&rows, r, c).unwrap()
}

fn stdout_lines(out: &Output) -> usize {
    String::from_utf8_lossy(&out.stdout).lines().count()
}

#[test]
fn staircase_reports_indices_of_brunovsky_pair() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "pair.json", BRUNOVSKY_PAIR);
    let out_file = dir.path().join("st.json");
    let out = run(brunovsky().arg("staircase").arg(&input).arg("--out").arg(&out_file));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout_lines(&out), 1);
    let v = read_json(&out_file);
    assert_eq!(v["weyr"], serde_json::json!([1, 1, 1]));
    assert_eq!(v["mu"], serde_json::json!([3]));
    assert_eq!(v["indices"]["mu_max"], 3);
    // The input direction moves to the top, so U reverses the states.
    let reversal = DMatrix::from_fn(3, 3, |i, j| if i + j == 2 { 1.0 } else { 0.0 });
    assert_eq!(matrix(&v["U"]).abs(), reversal);
}

#[test]
fn uncontrollable_exits_3() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "u.json", UNCONTROLLABLE);
    for sub in ["staircase", "transform"] {
        let out = run(brunovsky().current_dir(dir.path()).arg(sub).arg(&input));
        assert_eq!(out.status.code(), Some(3), "{sub}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("stair block"));
    }
}

#[test]
fn malformed_input_exits_2() {
    let dir = TempDir::new().unwrap();
    let broken = write(dir.path(), "broken.json", "{\"n\": 3, ");
    let wrong = write(dir.path(), "wrong.json", r#"{"n": 3, "m": 1, "A": [[0,1],[0,0]], "B": [[0],[0],[1]]}"#);
    for input in [&broken, &wrong, &dir.path().join("missing.json")] {
        let out = run(brunovsky().current_dir(dir.path()).arg("staircase").arg(input));
        assert_eq!(out.status.code(), Some(2), "{}", input.display());
    }
}

#[test]
fn rank_deficient_input_exits_2() {
    let dir = TempDir::new().unwrap();
    let input = write(
        dir.path(),
        "dep.json",
        r#"{"n": 3, "m": 2, "A": [[0,1,0],[0,0,1],[1,0,0]], "B": [[1,2],[0,0],[1,2]]}"#,
    );
    let out = run(brunovsky().current_dir(dir.path()).arg("transform").arg(&input));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("rank"));
}

#[test]
fn proposed_transform_has_small_recomputed_residuals() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "benign.json", BENIGN);
    let out = run(brunovsky().current_dir(dir.path()).arg("transform").arg(&input));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = read_json(&dir.path().join("benign.proposed.json"));
    assert!(v["residuals"]["residual_a"].as_f64().unwrap() <= 1e-6);
    assert!(v["residuals"]["residual_b"].as_f64().unwrap() <= 1e-6);
    let accepted = v["optimizer"]["accepted_steps"].as_u64().unwrap();
    let (first, last) = (
        v["optimizer"]["initial_objective"].as_f64().unwrap(),
        v["optimizer"]["final_objective"].as_f64().unwrap(),
    );
    assert!(last <= first, "{accepted} steps went from {first} to {last}");

    // Recheck the written triple by hand.
    let doc: SystemDocument = serde_json::from_str(BENIGN).unwrap();
    let sys = doc.to_system().unwrap();
    let (t, f, g) = (matrix(&v["T"]), matrix(&v["F"]), matrix(&v["G"]));
    let ti = t.clone().try_inverse().unwrap();
    let a_hat = &t * (sys.a() + sys.b() * &f) * ti;
    let b_hat = &t * sys.b() * &g;
    let target = brunovsky::brunovsky_target::<f64>(&[2, 2]).unwrap();
    assert!((a_hat - target.a).norm() <= 1e-6);
    assert!((b_hat - target.b).norm() <= 1e-6);
}

#[test]
fn ablation_is_default_parameter_construction() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "benign.json", BENIGN);
    let out_file = dir.path().join("plain.json");
    let out = run(brunovsky()
        .args(["transform", "--no-deadbeat", "--no-optimize", "--out"])
        .arg(&out_file)
        .arg(&input));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = read_json(&out_file);
    assert!(v.get("optimizer").is_none());

    let sys = serde_json::from_str::<SystemDocument>(BENIGN).unwrap().to_system().unwrap();
    let st = reduce_to_staircase(&sys).unwrap();
    let idx = index_summary(&st).unwrap();
    let inner = build_transformations(&default_parameters(&st, &idx), &st, &idx).unwrap();
    let want = compose_transforms(&st.u, &DMatrix::zeros(2, 4), &inner);
    assert!((matrix(&v["T"]) - want.t).norm() <= 1e-12);
    assert!((matrix(&v["F"]) - want.f).norm() <= 1e-12);
    assert!((matrix(&v["G"]) - want.g).norm() <= 1e-12);
}

#[test]
fn luenberger_reaches_same_canonical_pair() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "benign.json", BENIGN);
    let out = run(brunovsky()
        .current_dir(dir.path())
        .args(["transform", "--method", "luenberger"])
        .arg(&input));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = read_json(&dir.path().join("benign.luenberger.json"));
    assert_eq!(v["mu"], serde_json::json!([2, 2]));
    assert!(v["residuals"]["residual_a"].as_f64().unwrap() <= 1e-6);
    assert!(v["residuals"]["residual_b"].as_f64().unwrap() <= 1e-6);
    assert!(v["baseline"]["template_residual"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn luenberger_rejects_ablation_flags() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "benign.json", BENIGN);
    for flag in ["--no-deadbeat", "--no-optimize"] {
        let out = run(brunovsky()
            .current_dir(dir.path())
            .args(["transform", "--method", "luenberger", flag])
            .arg(&input));
        assert_eq!(out.status.code(), Some(2));
    }
}

#[test]
fn seeded_transform_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "benign.json", BENIGN);
    let outputs: Vec<String> = ["a.json", "b.json"]
        .iter()
        .map(|name| {
            let p = dir.path().join(name);
            let out = run(brunovsky().args(["transform", "--seed", "11", "--out"]).arg(&p).arg(&input));
            assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
            fs::read_to_string(p).unwrap()
        })
        .collect();
    assert_eq!(outputs[0], outputs[1]);
    let v: Value = serde_json::from_str(&outputs[0]).unwrap();
    assert!(v["residuals"]["residual_a"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn output_directory_from_environment() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "pair.json", BRUNOVSKY_PAIR);
    let target = dir.path().join("outputs");
    let out = run(brunovsky().env("BRUNOVSKY_OUT_DIR", &target).arg("staircase").arg(&input));
    assert!(out.status.success());
    assert!(target.join("pair.staircase.json").is_file());
}

#[test]
fn bench_accepts_consistent_indices() {
    let dir = TempDir::new().unwrap();
    let out_dir = dir.path().join("bench");
    let out = run(brunovsky()
        .args(["bench", "--trials", "2", "--indices", "5,5,3,2", "--n", "15", "--m", "4", "--seed", "5"])
        .args(["--cond-range", "1e2:1e4", "--out"])
        .arg(&out_dir));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout_lines(&out), 1);
    let csv = fs::read_to_string(out_dir.join("bench.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 2);
    assert!(out_dir.join("summary.json").is_file());
    assert!(out_dir.join("plot.gp").is_file());
}

#[test]
fn bench_rejects_inconsistent_flags() {
    let dir = TempDir::new().unwrap();
    let cases: [&[&str]; 4] = [
        &["--indices", "5,5,3", "--n", "15", "--m", "4"],
        &["--indices", "5,5,3,1", "--n", "15", "--m", "4"],
        &["--indices", "2,3", "--n", "5", "--m", "2"],
        &["--cond-range", "100"],
    ];
    for args in cases {
        let out = run(brunovsky()
            .current_dir(dir.path())
            .arg("bench")
            .args(args)
            .args(["--trials", "1"]));
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
    assert!(!dir.path().join("bench-out").exists());
}

#[test]
fn flags_override_config_file() {
    let dir = TempDir::new().unwrap();
    let config = write(
        dir.path(),
        "config.json",
        r#"{"bench": {"trials": 3, "n": 4, "m": 2, "indices": [2, 2], "methods": ["proposed"], "cond_range": [10.0, 100.0]}}"#,
    );
    let out_dir = dir.path().join("b");
    let out = run(brunovsky()
        .arg("--config")
        .arg(&config)
        .args(["bench", "--trials", "2", "--out"])
        .arg(&out_dir));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(out_dir.join("bench.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2);
    assert!(csv.lines().skip(1).all(|l| l.contains(",proposed,")));

    let bad = write(dir.path(), "bad.json", r#"{"bogus": 1}"#);
    let out = run(brunovsky().arg("--config").arg(&bad).arg("bench").arg("--trials").arg("1"));
    assert_eq!(out.status.code(), Some(2));
}

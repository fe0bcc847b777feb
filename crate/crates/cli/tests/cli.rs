use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn msl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_msl"))
        .args(args)
        .env_remove("MSL_TOL")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn m2(dir: &Path) -> String {
    write(
        dir,
        "m2.json",
        r#"{"diffuse_weight":"0","blocks":[{"dim":2,"weight":"1"}]}"#,
    )
    .to_string_lossy()
    .into_owned()
}

#[test]
fn delta0_of_m2() {
    let dir = tempfile::tempdir().unwrap();
    let o = msl(&["delta0", "--spec", &m2(dir.path())]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "3/4 (0.750000000000000)\n");
    let o = msl(&["delta0", "--spec", &m2(dir.path()), "--format", "csv"]);
    assert_eq!(stdout(&o), "quantity,value\ndelta0,0.75\n");
}

#[test]
fn fdim_matches_delta0_with_diffuse_part() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(
        dir.path(),
        "mix.json",
        r#"{"diffuse_weight":"1/2","blocks":[{"dim":3,"weight":"1/2"}]}"#,
    );
    let spec = spec.to_str().unwrap();
    let a = stdout(&msl(&["delta0", "--spec", spec]));
    let b = stdout(&msl(&["fdim", "--algebra", spec]));
    // 1 − (1/2)²/9
    assert_eq!(a, "35/36 (0.972222222222222)\n");
    assert_eq!(a, b);
}

#[test]
fn capacity_of_two_blocks() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(
        dir.path(),
        "a.json",
        r#"{"blocks":[{"dim":2,"weight":"2/3"},{"dim":1,"weight":"1/3"}]}"#,
    );
    let o = msl(&["capacity", "--algebra", spec.to_str().unwrap()]);
    // 1 − (4/9)/4 − 1/9
    assert_eq!(stdout(&o), "7/9 (0.777777777777778)\n");
}

#[test]
fn embed_report_for_m2_at_k5() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = msl(&[
        "embed",
        "--algebra",
        &m2(dir.path()),
        "--k",
        "5",
        "--r",
        "0.5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("multiplicities [2]"), "{text}");
    assert!(text.contains("null 1"));
    assert!(text.contains("quotient_dim 20"));
    let report: Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["command"], "embed");
    assert_eq!(report["version"], env!("CARGO_PKG_VERSION"));
    assert!(report["seed"].is_u64());
    assert_eq!(report["config"]["command"]["k"], 5);
    assert_eq!(report["result"]["multiplicities"][0], 2);
    assert_eq!(report["result"]["null_dim"], 1);
    assert_eq!(report["result"]["quotient_dim"], 20);
    assert_eq!(report["result"]["trace_error"], "1/5");
    let csv = fs::read_to_string(out.join("embed.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().starts_with("5,"));
}

#[test]
fn pack_circle_count() {
    let o = msl(&[
        "pack", "--target", "torus", "--m", "1", "--eps", "0.5", "--format", "csv",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("epsilon,pack_count,cover_count"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let count: usize = row[1].parse().unwrap();
    assert!((10..=12).contains(&count), "{count}");
}

#[test]
fn identical_config_gives_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str, seed: &str| {
        let out = dir.path().join(sub);
        let o = msl(&[
            "freeness",
            "--k",
            "30",
            "--trials",
            "6",
            "--seed",
            seed,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
        fs::read(out.join("freeness.csv")).unwrap()
    };
    let a = run("a", "7");
    let b = run("b", "7");
    let c = run("c", "8");
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn quotient_distance_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let u = write(
        dir.path(),
        "u.json",
        r#"{"k":2,"entries":[[[1,0],[0,0]],[[0,0],[1,0]]]}"#,
    );
    let v = write(
        dir.path(),
        "v.json",
        r#"{"k":2,"entries":[[[0,0],[1,0]],[[1,0],[0,0]]]}"#,
    );
    for sub in ["scalar", "torus"] {
        let o = msl(&[
            "quotient-dist",
            "--k",
            "2",
            "--subgroup",
            sub,
            "--u",
            u.to_str().unwrap(),
            "--v",
            v.to_str().unwrap(),
            "--format",
            "json",
        ]);
        assert_eq!(o.status.code(), Some(0));
        let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
        let d2 = r["result"]["d2"].as_f64().unwrap();
        assert!((d2 - 2f64.sqrt()).abs() < 1e-12, "{sub}: {d2}");
    }
    let o = msl(&[
        "quotient-dist",
        "--k",
        "2",
        "--subgroup",
        "full",
        "--u",
        u.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let first = stdout(&o);
    let d2: f64 = first.lines().next().unwrap().trim_start_matches("d2 ").parse().unwrap();
    assert!(d2.abs() < 1e-12, "{first}");
}

#[test]
fn conjugate_reports_ratios_within_bound() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(
        dir.path(),
        "a.json",
        r#"{"blocks":[{"dim":2,"weight":"1/2"},{"dim":1,"weight":"1/2"}]}"#,
    );
    let o = msl(&[
        "conjugate",
        "--algebra",
        spec.to_str().unwrap(),
        "--k",
        "9",
        "--trials",
        "4",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let trials = r["result"]["trials"].as_array().unwrap();
    assert_eq!(trials.len(), 4);
    for t in trials {
        assert!(t["max_ratio"].as_f64().unwrap() <= t["bound"].as_f64().unwrap() + 1e-10);
    }
}

#[test]
fn volume_of_one_dimensional_ball() {
    let o = msl(&["volume", "--d", "1", "--budget", "1000", "--format", "csv"]);
    let text = stdout(&o);
    let row: Vec<f64> = text
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(|x| x.parse().unwrap())
        .collect();
    assert_eq!(row[2], 2.0);
    assert_eq!(row[3], 2.0);
    assert_eq!(msl(&["volume", "--d", "9"]).status.code(), Some(1));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(msl(&[]).status.code(), Some(1));
    assert_eq!(msl(&["delta0"]).status.code(), Some(1));
    assert_eq!(
        msl(&["delta0", "--spec", "/nonexistent/spec.json"]).status.code(),
        Some(1)
    );
    assert_eq!(msl(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        msl(&["pack", "--target", "torus", "--eps", "-1"]).status.code(),
        Some(1)
    );
    assert_eq!(msl(&["suite", "42"]).status.code(), Some(1));
    assert_eq!(msl(&["--help"]).status.code(), Some(0));
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", r#"{"blocks":[{"dim":2,"weight":"3/2"}]}"#);
    assert_eq!(
        msl(&["embed", "--algebra", bad.to_str().unwrap(), "--k", "4"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn suite_passes_by_default_and_fails_when_tightened() {
    let o = msl(&["suite", "1", "2", "6"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).ends_with("all criteria passed\n"));

    let o = msl(&["--tol", "metric=1e-300,algebraic=1e-300", "suite", "6"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("[FAIL]  6"));

    let o = Command::new(env!("CARGO_BIN_EXE_msl"))
        .args(["suite", "6"])
        .env("MSL_TOL", "metric=1e-300,algebraic=1e-300")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_msl"))
        .args(["suite", "1"])
        .env("MSL_TOL", "nonsense")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

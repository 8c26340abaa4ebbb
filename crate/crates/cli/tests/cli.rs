use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_sybilshare"));
    c.env_remove("SYBILSHARE_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn run_config_with_bids() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "run.json",
        r#"{"mode":"run","mechanism":"shapley","cost":{"kind":"constant","c":1},"bids":[1.5,0.6,0.2]}"#,
    );
    let out = dir.path().join("report.json");
    let o = run(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("winners [0, 1]"), "{}", stdout(&o));
    let r = read_json(&out);
    assert_eq!(r["winners"], serde_json::json!([0, 1]));
    assert_eq!(r["payments"], serde_json::json!([0.5, 0.5, 0.0]));
}

#[test]
fn inline_flags_match_the_config() {
    let o = run(&[
        "run",
        "--mechanism",
        "shapley",
        "--cost",
        "constant:1",
        "--bids",
        "1.5,0.6,0.2",
        "--json",
    ]);
    assert_eq!(code(&o), 0);
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["winners"], serde_json::json!([0, 1]));
    assert_eq!(r["total_payment"], serde_json::json!(1.0));
}

#[test]
fn inline_flags_override_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"mode":"run","mechanism":"shapley","bids":[0.2]}"#,
    );
    let o = run(&["run", "--config", &cfg, "--bids", "0.6,0.6", "--json"]);
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["winners"], serde_json::json!([0, 1]));
}

#[test]
fn sybil_profile_run() {
    let o = run(&[
        "run",
        "--mechanism",
        "vcg",
        "--profile",
        "0.3,1,1;0.3",
        "--json",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["served"], serde_json::json!([true, true]));
    assert_eq!(r["payments"], serde_json::json!([0.0, 0.0]));
}

#[test]
fn worst_case_config_writes_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "wc.json",
        r#"{"mode":"worst-case","mechanism":"osp","n":5,"step":0.05}"#,
    );
    let out = dir.path().join("wc_report.json");
    let o = run(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = read_json(&out);
    let ratio = r["results"][0]["ratio"].as_f64().unwrap();
    assert!((ratio - 3.0).abs() < 0.01, "{ratio}");
    let csv = std::fs::read_to_string(dir.path().join("wc_report.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("n,mechanism,cost_kind,ratio,witness,runtime_ms")
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&row[..3], &["5", "osp", "constant"]);
    assert_eq!(row[4].split(';').count(), 5);
}

#[test]
fn worst_case_range() {
    let o = run(&[
        "worst-case",
        "--mechanism",
        "shapley",
        "--n",
        "2-4",
        "--step",
        "0.1",
        "--json",
    ]);
    assert_eq!(code(&o), 0);
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let results = r["results"].as_array().unwrap();
    assert_eq!(results.len(), 3);
    for (res, n) in results.iter().zip(2..) {
        let h: f64 = (1..=n).map(|i| 1.0 / i as f64).sum();
        let ratio = res["ratio"].as_f64().unwrap();
        assert!(ratio <= h + 1e-7 && ratio >= h - 0.01, "n={n}: {ratio}");
    }
}

#[test]
fn swi_config_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "swi.json",
        r#"{"mode":"swi","v":[1.01,0.3233,0.3233],"step":0.05,"max_sybils":3}"#,
    );
    let o = run(&["swi", "--config", &cfg]);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("pass"));
}

#[test]
fn outputs_are_byte_identical_without_timing() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        let o = run(&[
            "worst-case",
            "--mechanism",
            "shapley",
            "--n",
            "2-3",
            "--step",
            "0.1",
            "--no-timing",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(
        std::fs::read(a.with_extension("csv")).unwrap(),
        std::fs::read(b.with_extension("csv")).unwrap()
    );
    let c = dir.path().join("c.json");
    let o = run(&[
        "check",
        "--property",
        "sybil",
        "--mechanism",
        "shapley",
        "--max-agents",
        "2",
        "--max-sybils",
        "2",
        "--step",
        "0.1",
        "--no-timing",
        "--out",
        c.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 1);
    let text = std::fs::read_to_string(&c).unwrap();
    assert!(text.contains("\"elapsed_ms\": 0"));
}

#[test]
fn violations_exit_one() {
    let o = run(&[
        "check",
        "--property",
        "sybil",
        "--mechanism",
        "vcg",
        "--max-agents",
        "2",
    ]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
    assert!(stdout(&o).contains("violated"));
    let o = run(&[
        "check",
        "--property",
        "sybil",
        "--mechanism",
        "osp",
        "--max-agents",
        "2",
        "--step",
        "0.1",
    ]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let o = run(&[
        "check",
        "--property",
        "truthful",
        "--mechanism",
        "shapley",
        "--max-agents",
        "3",
        "--step",
        "0.1",
    ]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
}

#[test]
fn explicit_profile_check() {
    let o = run(&[
        "check",
        "--property",
        "sybil",
        "--mechanism",
        "shapley",
        "--v",
        "1.01,0.3233,0.3233",
        "--json",
    ]);
    assert_eq!(code(&o), 1);
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["verdict"], "violated");
    assert_eq!(r["witness"]["valuations"].as_array().unwrap().len(), 3);
}

#[test]
fn reproduce_exit_codes() {
    for case in ["vcg-sybil", "shapley-sybil", "swi-shapley"] {
        let o = run(&["reproduce", case]);
        assert_eq!(code(&o), 0, "{case}: {}", stdout(&o));
        assert!(stdout(&o).contains("expected"));
    }
    // The expected payment for this case does not match the mechanism.
    let o = run(&["reproduce", "potential-sybil"]);
    assert_eq!(code(&o), 1);
    assert!(
        stdout(&o).contains("0.198") && stdout(&o).contains("0.203"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(
        dir.path(),
        "bad.json",
        "{\n  \"mode\": \"run\",\n  \"bids\": [1, \n}",
    );
    let o = run(&["run", "--config", &bad]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 4"), "{}", stderr(&o));

    let unknown = write(dir.path(), "u.json", r#"{"mode":"run","bidz":[1]}"#);
    assert_eq!(code(&run(&["run", "--config", &unknown])), 2);

    let o = run(&[
        "check",
        "--mechanism",
        "shapley",
        "--max-agents",
        "4",
        "--max-sybils",
        "4",
    ]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("capped"), "{}", stderr(&o));

    assert_eq!(code(&run(&["reproduce", "no-such-case"])), 2);
    assert_eq!(
        code(&run(&[
            "run",
            "--mechanism",
            "potential",
            "--cost",
            "constant:2",
            "--bids",
            "1"
        ])),
        2
    );
    assert_eq!(
        code(&run(&[
            "run",
            "--mechanism",
            "shapley",
            "--cost",
            "concave:0,1,0.5",
            "--bids",
            "1"
        ])),
        2
    );
    assert_eq!(
        code(&run(&["run", "--mechanism", "shapley", "--bids", "-1"])),
        2
    );
    assert_eq!(
        code(&run(&["run", "--mechanism", "nope", "--bids", "1"])),
        2
    );
    assert_eq!(code(&run(&["run", "--bids", "1"])), 2);

    let swi = write(dir.path(), "s.json", r#"{"mode":"swi","v":[1]}"#);
    let o = run(&["worst-case", "--config", &swi]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("swi"));

    let o = bin()
        .args(["reproduce", "vcg-sybil"])
        .env("SYBILSHARE_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
    let o = bin()
        .args(["reproduce", "vcg-sybil"])
        .env("SYBILSHARE_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
}

#[test]
fn hybrid_reports_the_alternative_removal_rule() {
    let o = run(&[
        "run",
        "--mechanism",
        "hybrid",
        "--cost",
        "concave:0,1,1.4,1.7",
        "--bids",
        "1,0.8,0.5",
        "--json",
    ]);
    assert_eq!(code(&o), 0);
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["winners"], serde_json::json!([]));
    assert!(r["notes"][0].as_str().unwrap().contains("[0, 1]"));
}

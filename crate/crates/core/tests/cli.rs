use std::path::Path;
use std::process::{Command, Output};

fn fdgraph(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fdgraph")).args(args).output().expect("run fdgraph")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn invalid_arguments_exit_with_2() {
    assert_eq!(code(&fdgraph(&["simulate", "--k", "1", "--n", "10", "--t", "1"])), 2);
    assert_eq!(code(&fdgraph(&["simulate", "--n", "10", "--t", "-1"])), 2);
    assert_eq!(code(&fdgraph(&["threshold", "--t-grid", "3:1:5"])), 2);
    assert_eq!(code(&fdgraph(&["simulate", "--bogus"])), 2);
    assert_eq!(code(&fdgraph(&["run", "--preset", "nope"])), 2);
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "experiment = \"simulate\"\nunknown_key = 3\n").unwrap();
    assert_eq!(code(&fdgraph(&["run", "--config", bad.to_str().unwrap()])), 2);
}

#[test]
fn csv_output_is_byte_identical_across_runs_and_workers() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, workers: &str| {
        let p = dir.path().join(name);
        let o = fdgraph(&[
            "simulate", "--n", "2000", "--k", "5", "--t-grid", "0.5:2:4", "--replicas", "6", "--seed", "11", "--workers",
            workers, "--out", p.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read(p).unwrap()
    };
    let a = run("a.csv", "1");
    let b = run("b.csv", "1");
    let c = run("c.csv", "3");
    assert_eq!(a, b);
    assert_eq!(a, c);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("# schema=1\n# config_hash="));
    assert!(text.contains("# summary column="));
}

#[test]
fn refuses_to_overwrite_a_different_config() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("out.csv");
    let out = p.to_str().unwrap();
    let base = ["survival", "--t", "0.5", "--k", "5", "--replicas", "50", "--out", out];
    assert_eq!(code(&fdgraph(&base)), 0);
    // same config: allowed
    assert_eq!(code(&fdgraph(&base)), 0);
    let before = std::fs::read(&p).unwrap();
    let o = fdgraph(&["survival", "--t", "0.6", "--k", "5", "--replicas", "50", "--out", out]);
    assert_eq!(code(&o), 2);
    assert_eq!(std::fs::read(&p).unwrap(), before);
}

#[test]
fn config_presets_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    for syntax in ["toml", "json"] {
        let o = fdgraph(&["config", "threshold-scan", "--syntax", syntax]);
        assert_eq!(code(&o), 0);
        let p = dir.path().join(format!("c.{syntax}"));
        std::fs::write(&p, &o.stdout).unwrap();
        let r = fdgraph(&["run", "--config", p.to_str().unwrap(), "--format", "json"]);
        assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
        let v: serde_json::Value = serde_json::from_slice(&r.stdout).unwrap();
        assert_eq!(v["experiment"], "threshold-scan");
        assert_eq!(v["rows"].as_array().unwrap().len(), 81);
    }
}

#[test]
fn verify_exit_codes_follow_the_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("v.csv");
    let ok = fdgraph(&["verify", "--only", "2", "--out", report.to_str().unwrap()]);
    assert_eq!(code(&ok), 0, "{}", String::from_utf8_lossy(&ok.stdout));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("[PASS]  2"));
    assert!(Path::new(&report).exists());
    let bad = fdgraph(&["verify", "--only", "2", "--tamper-pi", "0.001"]);
    assert_eq!(code(&bad), 1);
    assert!(String::from_utf8_lossy(&bad.stdout).contains("[FAIL]  2"));
}

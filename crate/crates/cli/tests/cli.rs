use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn joinlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_joinlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("report is JSON")
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn eta_verify_reports_exact_values() {
    let out = joinlab(&["eta", "--k", "1", "--verify"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["passed"], true);
    assert_eq!(r["results"]["three_face_defect"], "0/1");
    assert_eq!(r["results"]["sup_distance_to_product"], "1/16");
    assert_eq!(r["command"], "eta");
    assert_eq!(r["input_digest"].as_str().unwrap().len(), 64);
}

#[test]
fn eta_rejects_k_zero() {
    let out = joinlab(&["eta", "--k", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(stderr(&out).contains("k must lie in"));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    assert_eq!(joinlab(&["eta", "--kk", "1"]).status.code(), Some(2));
}

#[test]
fn polytope_certifies_k1_order3_trivial() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "a.toml", "[action]\nz2k = 1\n");
    let out = joinlab(&[
        "polytope",
        "--config",
        cfg.to_str().unwrap(),
        "--order",
        "3",
        "--independence",
        "2",
        "--certify",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["results"]["trivial"], true);
    assert_eq!(r["results"]["witness"], Value::Null);
}

#[test]
fn polytope_optimizes_objective_from_explicit_action() {
    let dir = tempfile::tempdir().unwrap();
    // Rotation of Z/2; the objective picks out the diagonal mass v(0,0) + v(1,1).
    let cfg = write(
        dir.path(),
        "a.toml",
        "[action]\nspace = { uniform = 2 }\ngenerators = [[1, 0]]\nobjective = [\"1/1\", \"0/1\", \"0/1\", \"1/1\"]\n",
    );
    let out = joinlab(&[
        "polytope",
        "--config",
        cfg.to_str().unwrap(),
        "--order",
        "2",
        "--independence",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = report(&out);
    assert_eq!(r["results"]["status"], "optimal");
    assert_eq!(r["results"]["optimum"], "1/1");
    assert_eq!(r["passed"], true);
}

#[test]
fn malformed_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "s.toml",
        "[skew]\nbase = { uniform = 2 }\nfiber = { uniform = 2 }\nbase_map = [1, 0]\ncocycle = [[0, 1], [0, 0]]\n",
    );
    let out = joinlab(&[
        "cocycle",
        "--config",
        cfg.to_str().unwrap(),
        "--stat",
        "rigidity",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("skew.cocycle[1]"), "{}", stderr(&out));

    let cfg = write(
        dir.path(),
        "w.toml",
        "[action]\nspace = { weights = [\"1/2\", \"0.5\"] }\ngenerators = []\n",
    );
    let out = joinlab(&[
        "polytope",
        "--config",
        cfg.to_str().unwrap(),
        "--order",
        "2",
        "--independence",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr(&out).contains("action.space.weights[1]"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn json_config_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "m.json",
        r#"{"system": {"space": {"uniform": 4}, "map": [1, 2, 3, 0], "sets": [[0, 1], [0, 1]], "offsets": [2]}}"#,
    );
    let out = joinlab(&["mixing", "--config", cfg.to_str().unwrap(), "--sweep", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = report(&out);
    // R²{0,1} = {2,3} is disjoint from {0,1}.
    assert_eq!(r["results"]["correlation"], "0/1");
    assert_eq!(r["results"]["correlation_via_joining"], "0/1");
}

#[test]
fn cocycle_rigidity_on_power_skew() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "p.toml",
        "[skew]\nbase = { uniform = 3 }\nfiber = { uniform = 2 }\nbase_map = [1, 2, 0]\n\
         power = { fiber_map = [1, 0], exponents = [1, -1, 0] }\n[stats]\nn = 1\nsequence = [3, 6]\n",
    );
    let out = joinlab(&[
        "cocycle",
        "--config",
        cfg.to_str().unwrap(),
        "--stat",
        "rigidity",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let values = &report(&out)["results"]["values"];
    // Exponents sum to zero over the base period.
    assert_eq!(values[0]["value"], "1/1");
    assert_eq!(values[1]["returns_identity"], true);
}

#[test]
fn sample_coboundary_returns_identity_at_period() {
    let out = joinlab(&[
        "sample",
        "--seed",
        "3",
        "--mode",
        "random-coboundary",
        "--base-size",
        "5",
        "--analyze",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["results"]["analysis"]["returns_identity_at_period"], true);
    assert_eq!(r["results"]["analysis"]["rigidity_at_period"], "1/1");
}

#[test]
fn joining_verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let eta = report(&joinlab(&["eta", "--k", "1"]));
    let good = write(
        dir.path(),
        "eta.json",
        &eta["results"]["tensor"].to_string(),
    );
    let out = joinlab(&[
        "joining",
        "verify",
        "--file",
        good.to_str().unwrap(),
        "--action",
        "z2k:1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["results"]["face_defects"]["3"], "0/1");

    let bad = write(
        dir.path(),
        "bad.json",
        r#"{"factors": [["1/2", "1/2"], ["1/2", "1/2"]], "entries": [[[0, 1], "1/1"]]}"#,
    );
    let out = joinlab(&[
        "joining",
        "verify",
        "--file",
        bad.to_str().unwrap(),
        "--action",
        "z2k:1",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(&out)["results"]["is_joining"], false);

    let out = joinlab(&[
        "joining",
        "verify",
        "--file",
        good.to_str().unwrap(),
        "--action",
        "torus",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn output_flag_writes_file_and_timing_is_opt_in() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = joinlab(&[
        "--output",
        path.to_str().unwrap(),
        "eta",
        "--k",
        "2",
        "--verify",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(r.get("wall_time_ms").is_none());
    assert_eq!(r["results"]["sup_distance_to_product"], "3/256");

    let timed = report(&joinlab(&["--timing", "eta", "--k", "1"]));
    assert!(timed["wall_time_ms"].is_u64());
}

#[test]
fn digest_tracks_config_contents() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "a.toml", "[action]\nz2k = 1\n");
    let args = [
        "polytope",
        "--config",
        cfg.to_str().unwrap(),
        "--order",
        "2",
        "--independence",
        "1",
    ];
    let first = report(&joinlab(&args));
    write(dir.path(), "a.toml", "[action]\nz2k = 1 # same action\n");
    let second = report(&joinlab(&args));
    assert_ne!(first["input_digest"], second["input_digest"]);
    assert_eq!(first["results"], second["results"]);
}

use std::path::Path;
use std::process::{Command, Output};

use gwb_cli::formats::parse_step_quantile_csv;
use gwb_core::random::measure_1d;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

fn gwb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gwb")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, contents: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p.to_str().unwrap().to_owned()
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn error_record(out: &Output) -> Value {
    serde_json::from_slice(out.stderr.trim_ascii()).unwrap()
}

#[test]
fn identical_measures_have_zero_cost() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "m.json", r#"{"atoms":[[0,1],[2,-1]],"masses":[0.3,0.7]}"#);
    let v = stdout_json(&gwb(&["w2", "--a", &m, "--b", &m]));
    assert_eq!(v["cost"], 0.0);
}

#[test]
fn w2_writes_plan() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.json", r#"{"atoms":[[0],[1]],"masses":[0.5,0.5]}"#);
    let b = write(dir.path(), "b.json", r#"{"atoms":[[3]],"masses":[1]}"#);
    let plan = dir.path().join("plan.csv");
    let v = stdout_json(&gwb(&["w2", "--a", &a, "--b", &b, "--plan", plan.to_str().unwrap()]));
    assert_eq!(v["cost"], 6.5);
    assert_eq!(std::fs::read_to_string(plan).unwrap(), "i,j,mass\n0,0,0.5\n1,0,0.5\n");
}

#[test]
fn counterexample_reports_eta_energy() {
    let v = stdout_json(&gwb(&["counterexample", "--samples", "200", "--seed", "7"]));
    assert!((v["eta_energy"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(v["diagonal_min"].as_f64().unwrap() >= 2.0 - 1e-9);
}

#[test]
fn randomized_subcommands_require_a_seed() {
    let out = gwb(&["counterexample", "--samples", "10"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn weight_sum_error_record() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "f.json", r#"{"entries":[{"weight":0.5,"measure":{"atoms":[0],"masses":[1]}}]}"#);
    let out = gwb(&["barycenter", "--family", &f]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_record(&out)["error"], "WeightSumInvalid");
}

#[test]
fn module_errors_surface_verbatim() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.json", r#"{"atoms":[[0]],"masses":[1]}"#);
    let b = write(dir.path(), "b.json", r#"{"atoms":[[0,0]],"masses":[1]}"#);
    let out = gwb(&["w2", "--a", &a, "--b", &b]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_record(&out)["error"], "DimensionMismatch");

    let out = gwb(&["gauss-dirac", "--m1", "0", "--s1", "1", "--m2", "0", "--s2", "2"]);
    assert_eq!(error_record(&out)["error"], "StdOrder");

    let f = write(dir.path(), "g.json", r#"{"entries":[{"weight":1,"measure":{"gaussian":{"mean":0,"std":1}}}]}"#);
    let out = gwb(&["barycenter", "--family", &f, "--grid", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_record(&out)["error"], "InvalidGrid");
}

#[test]
fn parse_and_usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", "{not json");
    let out = gwb(&["w2", "--a", &bad, "--b", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_record(&out)["error"], "Parse");
    assert_eq!(gwb(&["w2", "--a", "/nonexistent/a.json", "--b", &bad]).status.code(), Some(2));
    assert_eq!(gwb(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn quantile_csv_round_trip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for i in 0..20 {
        let mu = measure_1d(&mut rng, 12, 50.0);
        let fam =
            serde_json::json!({"entries": [{"weight": 1.0, "measure": {"atoms": mu.atoms(), "masses": mu.masses()}}]});
        let f = write(dir.path(), &format!("f{i}.json"), &fam.to_string());
        let csv = dir.path().join(format!("q{i}.csv"));
        assert!(gwb(&["barycenter", "--family", &f, "--out", csv.to_str().unwrap()]).status.success());
        let back = parse_step_quantile_csv(&std::fs::read_to_string(&csv).unwrap()).unwrap();
        let q = mu.quantile();
        assert_eq!(back.values(), q.values());
        assert_eq!(back.breakpoints(), q.breakpoints());
    }
}

#[test]
fn grid_barycenter_csv_has_one_row_per_node() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "f.json",
        r#"{"entries":[{"weight":2,"measure":{"uniform":{"a":0,"b":1}}},{"weight":-1,"measure":{"atoms":[0.5],"masses":[1]}}]}"#,
    );
    let out = gwb(&["barycenter", "--family", &f, "--grid", "4"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "t,value\n0.125,-0.25\n0.375,0.25\n0.625,0.75\n0.875,1.25\n");
}

#[test]
fn energy_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "f.json",
        r#"{"entries":[{"weight":2,"measure":{"atoms":[1],"masses":[1]}},{"weight":-1,"measure":{"atoms":[0],"masses":[1]}}]}"#,
    );
    let mu = write(dir.path(), "mu.json", r#"{"atoms":[2],"masses":[1]}"#);
    let v = stdout_json(&gwb(&["energy", "--family", &f, "--measure", &mu]));
    assert_eq!(v["energy"], -2.0);
}

#[test]
fn sticky_csv() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "s.json", r#"{"positions":[-1,1],"velocities":[1,-1],"masses":[0.5,0.5]}"#);
    let out = dir.path().join("traj.csv");
    assert!(gwb(&["sticky", "--state", &s, "--times", "0,0.5,2", "--out", out.to_str().unwrap()]).status.success());
    assert_eq!(
        std::fs::read_to_string(out).unwrap(),
        "t,atom,mass\n0,-1,0.5\n0,1,0.5\n0.5,-0.5,0.5\n0.5,0.5,0.5\n2,0,1\n"
    );
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let sched = write(
        dir.path(),
        "sched.json",
        r#"{"k_values":[4,16,64],"seeds":[1,2,3],"target":{"population":{
            "positive_mass":1.5,
            "positive":{"kind":"spread","center_mean":1,"center_std":0.5,"min_half_width":0.5,"max_half_width":1.5,"min_atoms":2,"max_atoms":5},
            "negative_mass":0.5,
            "negative":{"kind":"dirac","mean":0,"std":1}}}}"#,
    );
    let run = |threads: &str, name: &str| {
        let p = dir.path().join(name);
        let out = Command::new(env!("CARGO_BIN_EXE_gwb"))
            .env("GWB_THREADS", threads)
            .args(["consistency", "--schedule", &sched, "--out", p.to_str().unwrap()])
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        std::fs::read(p).unwrap()
    };
    let a = run("1", "a.json");
    assert_eq!(a, run("4", "b.json"));
    let report: Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(report["runs"].as_array().unwrap().len(), 9);
    assert_eq!(report["reference"]["kind"], "proxy_largest_k");

    let c = dir.path().join("c.json");
    let d = dir.path().join("d.json");
    for p in [&c, &d] {
        assert!(gwb(&["counterexample", "--samples", "50", "--seed", "3", "--report", p.to_str().unwrap()])
            .status
            .success());
    }
    assert_eq!(std::fs::read(c).unwrap(), std::fs::read(d).unwrap());
}

#[test]
fn schedule_needs_explicit_seed() {
    let dir = tempfile::tempdir().unwrap();
    let sched = write(
        dir.path(),
        "s.json",
        r#"{"k_values":[1],"target":{"family":{"entries":[{"weight":1,"measure":{"atoms":[0],"masses":[1]}}]}}}"#,
    );
    assert_eq!(gwb(&["consistency", "--schedule", &sched]).status.code(), Some(2));
}

#[test]
fn bad_thread_count_is_a_usage_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_gwb"))
        .env("GWB_THREADS", "zero")
        .args(["counterexample", "--samples", "1", "--seed", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

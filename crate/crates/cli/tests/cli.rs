use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn l2b(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_l2b"))
        .args(args)
        .env("L2B_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.display().to_string()
}

fn full_instance(m: usize, n: usize) -> String {
    let opts: Vec<String> = (0..m).map(|i| format!("{{\"machines\":[{i}],\"weight\":1.0}}")).collect();
    let mut s = format!("{{\"machines\":{m},\"model\":\"standard\"}}\n");
    for _ in 0..n {
        s.push_str(&format!("{{\"options\":[{}]}}\n", opts.join(",")));
    }
    s
}

#[test]
fn greedy_run_reports_ratio_within_bound() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "tiny.jsonl", &full_instance(2, 3));
    let out = l2b(&["run", "--alg", "greedy", "--instance", &path]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json_of(&out);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["cost"], 5.0);
    let ratio = v["ratio_bound"].as_f64().unwrap();
    assert!(ratio <= 3.0 + 2.0 * 2f64.sqrt() + 1e-6);
    assert!(v["wall_time"].is_null());
}

#[test]
fn randomized_runs_need_a_seed() {
    let out = l2b(&["run", "--alg", "balance", "--random", "3x6"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed required"));
}

#[test]
fn malformed_instance_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "bad.jsonl", "{\"machines\":2,\"model\":\"standard\"}\n{\"options\":[{\"machines\":[5],\"weight\":1}]}\n");
    let out = l2b(&["run", "--alg", "greedy", "--instance", &path]);
    assert_eq!(out.status.code(), Some(2));
    let out = l2b(&["run", "--alg", "greedy", "--instance", "/nonexistent/x.jsonl"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn correlated_certificate_on_random_instance() {
    let out = l2b(&["verify", "--alg", "correlated", "--random", "4x50", "--trials", "20000", "--seed", "7"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json_of(&out);
    assert_eq!(v["feasible"], true);
    let upper = v["cost"]["ci99"][1].as_f64().unwrap();
    let obj = v["dual_objective"].as_f64().unwrap();
    assert!(upper / obj <= 4.9843 * 1.01, "{}", upper / obj);
    assert_eq!(v["checks"]["nu_load"]["violations"].as_array().unwrap().len(), 0);
}

#[test]
fn verify_every_algorithm() {
    for alg in ["greedy", "balance", "fracbalance", "correlated"] {
        let out = l2b(&["verify", "--alg", alg, "--random", "3x20", "--seed", "3", "--trials", "500"]);
        assert!(out.status.success(), "{alg}: {}", String::from_utf8_lossy(&out.stderr));
        let v = json_of(&out);
        assert_eq!(v["failures"].as_array().unwrap().len(), 0, "{alg}");
    }
}

#[test]
fn sweep_emits_csv() {
    let out = l2b(&[
        "sweep", "--alg", "fracbalance,balance", "--adversary", "n=64", "--adversary", "n=256", "--seed", "1", "--seeds", "2",
        "--trials", "50",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "n,seed,algorithm,cost,opt_upper,ratio,analytic_lower_ratio");
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    assert_eq!(rows.len(), 8);
    for pair in rows.chunks(2) {
        let frac: f64 = pair[0][5].parse().unwrap();
        let bal: f64 = pair[1][5].parse().unwrap();
        assert_eq!(pair[0][2], "fracbalance");
        assert!(bal > frac && frac < 4.0);
    }
}

#[test]
fn sweep_rejects_small_n() {
    let out = l2b(&["sweep", "--alg", "fracbalance", "--adversary", "n=1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n ≥ 2 required"));
    let out = l2b(&["sweep", "--alg", "balance", "--adversary", "n=8"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn constants_verdicts() {
    let out = l2b(&["constants"]);
    assert!(out.status.success());
    assert_eq!(json_of(&out)["passed"], true);
    let out = l2b(&["constants", "--gamma", "0.205"]);
    assert_eq!(out.status.code(), Some(3));
    let v = json_of(&out);
    assert!(v["regions"].as_array().unwrap().iter().any(|r| r["passed"] == false));
    assert!(String::from_utf8_lossy(&out.stderr).contains("region"));
    let out = l2b(&["constants", "--grid-step", "1e-4"]);
    assert!(out.status.success());
}

#[test]
fn oracle_examples() {
    let dir = tempfile::tempdir().unwrap();
    let one = write(dir.path(), "one.jsonl", &full_instance(1, 1));
    let out = l2b(&["oracle", "--instance", &one]);
    assert!(out.status.success());
    let v = json_of(&out);
    assert_eq!(v["instances"][0]["opt"], 1.0);
    let g = v["instances"][0]["objectives"]["greedy"].as_f64().unwrap();
    assert!((g - 1.0 / (3.0 + 2.0 * 2f64.sqrt())).abs() < 1e-12);

    let ok = write(dir.path(), "ok.jsonl", &full_instance(2, 8));
    assert!(l2b(&["oracle", "--instance", &ok]).status.success());
    let big = write(dir.path(), "big.jsonl", &full_instance(2, 21));
    assert_eq!(l2b(&["oracle", "--instance", &big]).status.code(), Some(2));

    let out = l2b(&["oracle", "--random", "3x6", "--seed", "0", "--seeds", "100"]);
    assert!(out.status.success());
    assert_eq!(json_of(&out)["violations"], 0);
}

#[test]
fn gen_round_trips_through_run() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("lb.jsonl").display().to_string();
    assert!(l2b(&["gen", "--adversary", "n=16,seed=2", "--out", &path]).status.success());
    let a = json_of(&l2b(&["run", "--alg", "fracbalance", "--instance", &path]));
    let b = json_of(&l2b(&["run", "--alg", "fracbalance", "--adversary", "n=16,seed=2"]));
    assert_eq!(a["cost"], b["cost"]);
}

#[test]
fn outputs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["run", "--alg", "correlated", "--random", "3x30", "--seed", "5", "--trials", "300"],
        vec!["verify", "--alg", "balance", "--adversary", "n=32,seed=4", "--seed", "4", "--trials", "300"],
        vec!["sweep", "--alg", "balance", "--adversary", "n=64", "--seed", "9", "--trials", "20"],
        vec!["constants"],
        vec!["oracle", "--random", "2x5", "--seed", "1", "--seeds", "3"],
        vec!["gen", "--stress", "1,2", "--seed", "3"],
    ];
    for (i, case) in cases.iter().enumerate() {
        let mut files = Vec::new();
        for k in 0..2 {
            let p = dir.path().join(format!("{i}-{k}.out")).display().to_string();
            let mut args = case.clone();
            args.extend(["--out", p.as_str()]);
            let out = l2b(&args);
            assert!(out.status.success(), "{case:?}: {}", String::from_utf8_lossy(&out.stderr));
            files.push(std::fs::read(&p).unwrap());
        }
        assert!(!files[0].is_empty());
        assert_eq!(files[0], files[1], "{case:?}");
    }
}

#[test]
fn thread_count_does_not_change_results() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_l2b"))
            .args(["run", "--alg", "correlated", "--random", "3x30", "--seed", "5", "--trials", "300"])
            .env("L2B_THREADS", threads)
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(run("1"), run("3"));
}

// SPDX-License-Identifier: Apache-2.0
use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

use cellprobe::enumerate::Cube;
use cellprobe::forest::format;
use cellprobe::samplers::{thorp_network, ThorpSpec};
use cellprobe::{DecisionForest, Node, Symbol};
use serde_json::Value;
use tempfile::TempDir;

fn cellprobe(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cellprobe"))
        .current_dir(dir)
        .env_remove("CELLPROBE_LEDGER")
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stdout);
    serde_json::from_str(text.lines().next().expect("one line of output")).expect("json output")
}

fn error_reason(out: &Output) -> String {
    let v: Value = serde_json::from_slice(&out.stderr).expect("json error");
    v["error"]["reason"].as_str().unwrap().to_string()
}

fn ledger_lines(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path).unwrap().lines().map(str::to_string).collect()
}

/// Drops the trailing timestamp column.
fn without_stamp(line: &str) -> &str {
    &line[..line.rfind(',').unwrap()]
}

#[test]
fn thorp_tv_pipeline() {
    let dir = TempDir::new().unwrap();
    let gen = cellprobe(dir.path(), &["gen-thorp", "--log2n", "3", "--rounds", "3", "-o", "f.json"]);
    assert_eq!(gen.status.code(), Some(0));
    let out = cellprobe(dir.path(), &["analyze", "tv", "--forest", "f.json", "--target", "uniform-perm", "--ledger", "l.csv"]);
    assert_eq!(out.status.code(), Some(0));
    let measured = stdout_json(&out)["measured"].as_f64().unwrap();

    // Oracle: run the network on every coin assignment.
    let spec = ThorpSpec::new(3, 3).unwrap();
    let mut counts: BTreeMap<Vec<Symbol>, u64> = BTreeMap::new();
    Cube::new(spec.s(), 2, (0..spec.s()).collect(), 1 << 20).unwrap().for_each(|coins| {
        *counts.entry(thorp_network(spec, coins).unwrap()).or_default() += 1;
    });
    let total = (1u64 << spec.s()) as f64;
    let uniform = 1.0 / 40320.0;
    let seen: f64 = counts.values().map(|&c| (c as f64 / total - uniform).abs()).sum();
    let oracle = 0.5 * (seen + (40320 - counts.len()) as f64 * uniform);
    assert!((measured - oracle).abs() < 1e-12, "{measured} vs {oracle}");

    let lines = ledger_lines(&dir.path().join("l.csv"));
    assert_eq!(lines[0], "lemma_id,instance_id,bound,measured,status,trials,seed,timestamp");
    assert!(lines[1].starts_with("tv,f.json~uniform-perm,,"));
}

#[test]
fn at_least_two_example_passes() {
    let dir = TempDir::new().unwrap();
    let out = cellprobe(dir.path(), &["verify", "at-least-two", "--q", "0.04,0.04", "--alpha", "0.04", "--ledger", "l.csv"]);
    assert_eq!(out.status.code(), Some(0));
    let r = stdout_json(&out);
    assert_eq!(r["status"], "pass");
    assert!((r["measured"].as_f64().unwrap() - 0.04 * 0.04).abs() < 1e-12);
}

#[test]
fn empty_harper_set_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let out = cellprobe(dir.path(), &["verify", "harper", "--set", "empty", "--k", "1", "--ledger", "l.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_reason(&out), "empty set");
    assert!(!dir.path().join("l.csv").exists());
}

#[test]
fn usage_and_budget_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let unknown = cellprobe(dir.path(), &["verify", "no-such-lemma"]);
    assert_eq!(unknown.status.code(), Some(2));
    assert_eq!(error_reason(&unknown), "unknown-lemma");

    let unseeded = cellprobe(dir.path(), &["gen-random", "--s", "4"]);
    assert_eq!(unseeded.status.code(), Some(2));
    assert_eq!(error_reason(&unseeded), "missing-seed");

    cellprobe(dir.path(), &["gen-thorp", "--log2n", "2", "--rounds", "3", "-o", "f.json"]);
    let over = cellprobe(dir.path(), &["analyze", "entropy", "--forest", "f.json", "--budget-states", "16"]);
    assert_eq!(over.status.code(), Some(2));
    assert_eq!(error_reason(&over), "budget-exceeded");

    let bad_flag = cellprobe(dir.path(), &["eval", "--no-such-flag"]);
    assert_eq!(bad_flag.status.code(), Some(2));
}

#[test]
fn failed_verification_exits_one() {
    // Tree 0 reads cell 0 and then the cell it names; trees 1..=4 read cells 1..=4.
    let k = 4u32;
    let mut roots = vec![Node::query(0, (0..k).map(|a| Node::reader(a as usize + 1, k)).collect())];
    roots.extend((1..=k as usize).map(|c| Node::reader(c, k)));
    let f = DecisionForest::from_nodes(k as usize + 1, k, k, false, roots).unwrap();
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("f.json"), format::to_json(&f)).unwrap();
    let out = cellprobe(
        dir.path(),
        &[
            "verify", "lipschitz-after-conditioning", "--forest", "f.json", "--mu", "1", "--delta", "0.25",
            "--cells", "0", "--trials", "2000", "--seed", "9", "--ledger", "l.csv",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    let r = stdout_json(&out);
    assert_eq!(r["status"], "fail");
    assert_eq!(r["seed"], 9);
    assert!(ledger_lines(&dir.path().join("l.csv"))[1].contains(",fail,2000,9,"));
}

#[test]
fn seeded_reports_are_reproducible() {
    let dir = TempDir::new().unwrap();
    let args = ["verify", "enforcement", "--seed", "77", "--trials", "300", "--ledger", "l.csv"];
    let a = cellprobe(dir.path(), &args);
    let b = cellprobe(dir.path(), &args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let r = stdout_json(&a);
    assert_eq!(r["seed"], 77);
    assert_eq!(r["mode"], "monte_carlo");
    let lines = ledger_lines(&dir.path().join("l.csv"));
    assert_eq!(lines.len(), 3);
    assert_eq!(without_stamp(&lines[1]), without_stamp(&lines[2]));
    assert!(without_stamp(&lines[1]).ends_with(",300,77"));

    let g1 = cellprobe(dir.path(), &["gen-random", "--seed", "5", "--s", "6", "--m", "3"]);
    let g2 = cellprobe(dir.path(), &["gen-random", "--seed", "5", "--s", "6", "--m", "3"]);
    assert_eq!(g1.stdout, g2.stdout);
}

#[test]
fn ledger_appends_and_fresh_restarts() {
    let dir = TempDir::new().unwrap();
    let ledger = dir.path().join("l.csv");
    let run = |extra: &[&str]| {
        let mut args = vec!["verify", "power-bound", "--steps", "50", "--ledger", "l.csv"];
        args.extend_from_slice(extra);
        assert_eq!(cellprobe(dir.path(), &args).status.code(), Some(0));
    };
    run(&[]);
    let first = ledger_lines(&ledger);
    run(&[]);
    let second = ledger_lines(&ledger);
    assert_eq!(second.len(), 3);
    assert_eq!(&second[..2], &first[..]);
    run(&["--fresh"]);
    assert_eq!(ledger_lines(&ledger).len(), 2);
}

#[test]
fn ledger_path_comes_from_the_environment() {
    let dir = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_cellprobe"))
        .current_dir(dir.path())
        .env("CELLPROBE_LEDGER", dir.path().join("env.csv"))
        .args(["verify", "light-mass", "--p", "0.25,0.25,0.25,0.25", "--c", "0.5"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(ledger_lines(&dir.path().join("env.csv")).len(), 2);
}

#[test]
fn flags_override_the_config_document() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("c.json"), r#"{"log2n": 2, "rounds": 4}"#).unwrap();
    let out = cellprobe(dir.path(), &["gen-thorp", "--config", "c.json", "--rounds", "1", "-o", "f.json"]);
    assert_eq!(out.status.code(), Some(0));
    let f = format::from_json(&std::fs::read_to_string(dir.path().join("f.json")).unwrap()).unwrap();
    assert_eq!((f.m(), f.s()), (4, 2));

    std::fs::write(dir.path().join("bad.json"), r#"{"roundz": 2}"#).unwrap();
    let bad = cellprobe(dir.path(), &["gen-thorp", "--config", "bad.json"]);
    assert_eq!(bad.status.code(), Some(2));
    assert_eq!(error_reason(&bad), "config");
}

#[test]
fn sweep_runs_a_corpus_config() {
    let dir = TempDir::new().unwrap();
    std::fs::write(
        dir.path().join("corpus.json"),
        r#"{"corpora": [{"family": "at-least-two", "seed": 1, "count": 5}, {"family": "harper", "seed": 3, "count": 2}]}"#,
    )
    .unwrap();
    let out = cellprobe(dir.path(), &["sweep", "corpus.json", "--ledger", "l.csv", "-o", "reports.jsonl"]);
    assert_eq!(out.status.code(), Some(0));
    let summary = stdout_json(&out);
    assert_eq!(summary["family"], "at-least-two");
    assert_eq!(summary["fail"], 0);
    let rows = ledger_lines(&dir.path().join("l.csv")).len() - 1;
    assert_eq!(rows, 5 + 2 * 6);
    let jsonl = std::fs::read_to_string(dir.path().join("reports.jsonl")).unwrap();
    assert_eq!(jsonl.lines().count(), rows);
}

#[test]
fn eval_and_couple_record_their_seed() {
    let dir = TempDir::new().unwrap();
    cellprobe(dir.path(), &["gen-thorp", "--log2n", "2", "--rounds", "2", "-o", "f.json"]);
    let out = cellprobe(dir.path(), &["eval", "--forest", "f.json", "--input", "1,0,1,1"]);
    let v = stdout_json(&out);
    let spec = ThorpSpec::new(2, 2).unwrap();
    let oracle = thorp_network(spec, &[1, 0, 1, 1]).unwrap();
    assert_eq!(v["output"], serde_json::to_value(oracle).unwrap());

    let rand = cellprobe(dir.path(), &["eval", "--forest", "f.json", "--seed", "12"]);
    assert_eq!(stdout_json(&rand)["seed"], 12);

    std::fs::write(
        dir.path().join("t.json"),
        r#"{"input_arity":2,"input_alphabet":2,"output_alphabet":2,"bot_allowed":false,"trees":[{"query":0,"children":[{"leaf":0},{"query":1,"children":[{"leaf":1},{"leaf":0}]}]}]}"#,
    )
    .unwrap();
    let c = stdout_json(&cellprobe(dir.path(), &["couple", "--forest", "t.json", "--seed", "4"]));
    // The only accepting input is (1, 0).
    assert_eq!(c["y"], serde_json::json!([1, 0]));
    assert_eq!(c["seed"], 4);
    assert!((c["stats"]["mu"].as_f64().unwrap() - 0.25).abs() < 1e-15);
}

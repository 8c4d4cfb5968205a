use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn hashqkd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hashqkd"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn records(text: &str) -> Vec<Value> {
    text.lines()
        .filter(|l| l.starts_with('{'))
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn aggregate(text: &str) -> Value {
    records(text)
        .into_iter()
        .find(|r| r["record"] == "aggregate")
        .expect("aggregate record")["result"]
        .clone()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn bounds_default_prints_entropy() {
    let o = hashqkd(&["bounds"]);
    assert_eq!(o.status.code(), Some(0));
    let agg = aggregate(&stdout(&o));
    let expected = 0.5 + 0.5 * 6f64.log2();
    assert!((agg["entropy_bound"].as_f64().unwrap() - expected).abs() < 1e-12);
    assert!(stdout(&o).contains("1.792481"));
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(hashqkd(&["--help"]).status.code(), Some(0));
    assert_eq!(hashqkd(&["--version"]).status.code(), Some(0));
    assert_eq!(hashqkd(&["verify-sim", "--help"]).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(hashqkd(&[]).status.code(), Some(1));
    assert_eq!(hashqkd(&["teleport"]).status.code(), Some(1));
    assert_eq!(hashqkd(&["bounds", "--delta", "abc"]).status.code(), Some(1));
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad_field = write(dir.path(), "a.toml", "kind = \"bounds\"\n[bounds]\ndelt = 0.1\n");
    let o = hashqkd(&["bounds", "--config", &bad_field]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!o.stderr.is_empty());

    let wrong_kind = write(dir.path(), "b.toml", "kind = \"estimate\"\n");
    assert_eq!(hashqkd(&["bounds", "--config", &wrong_kind]).status.code(), Some(1));

    let missing = dir.path().join("nope.toml");
    assert_eq!(
        hashqkd(&["bounds", "--config", missing.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );

    assert_eq!(
        hashqkd(&["verify-sim", "--pairs", "3", "--rounds", "3"]).status.code(),
        Some(1)
    );
    assert_eq!(hashqkd(&["bounds", "--delta", "2"]).status.code(), Some(1));
    assert_eq!(hashqkd(&["--trials", "0", "bounds"]).status.code(), Some(1));
}

#[test]
fn unwritable_output_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("missing-dir").join("out.jsonl");
    let o = hashqkd(&["bounds", "--output", target.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn output_file_and_footer() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.jsonl");
    let o = hashqkd(&[
        "--trials",
        "50",
        "--output",
        out.to_str().unwrap(),
        "game-sim",
        "--length",
        "8",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().all(|l| l.starts_with("# ")));
    let text = std::fs::read_to_string(&out).unwrap();
    let recs = records(&text);
    assert_eq!(recs[0]["record"], "config");
    assert_eq!(recs.iter().filter(|r| r["record"] == "trial").count(), 50);
    assert!(text.ends_with(&stdout(&o)));
}

#[test]
fn same_seed_same_bytes() {
    let run = || {
        stdout(&hashqkd(&[
            "--seed",
            "11",
            "--trials",
            "300",
            "verify-sim",
            "--pairs",
            "12",
            "--rounds",
            "5",
        ]))
    };
    assert_eq!(run(), run());
    let other = stdout(&hashqkd(&[
        "--seed", "12", "--trials", "300", "estimate", "--pairs", "100", "--sample", "50",
    ]));
    let again = stdout(&hashqkd(&[
        "--seed", "12", "--trials", "300", "estimate", "--pairs", "100", "--sample", "50",
    ]));
    assert_eq!(other, again);
}

#[test]
fn results_file_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.jsonl");
    let o = hashqkd(&[
        "--seed",
        "3",
        "--trials",
        "40",
        "--output",
        first.to_str().unwrap(),
        "estimate",
        "--pairs",
        "200",
        "--sample",
        "60",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&first).unwrap();
    let rerun = hashqkd(&["estimate", "--config", first.to_str().unwrap()]);
    assert_eq!(rerun.status.code(), Some(0));
    assert_eq!(stdout(&rerun), text);
    let second = dir.path().join("second.jsonl");
    hashqkd(&[
        "estimate",
        "--config",
        first.to_str().unwrap(),
        "--output",
        second.to_str().unwrap(),
    ]);
    assert_eq!(std::fs::read(&second).unwrap(), text.as_bytes());
    let recs = records(&text);
    assert_eq!(recs[0]["seed"], 3);
    assert_eq!(recs.iter().filter(|r| r["record"] == "trial").count(), 40);
}

#[test]
fn single_flaw_hashing_rejects_often() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "flaw.toml",
        "kind = \"verify-sim\"\nseed = 5\ntrials = 4000\n[verify-sim]\npairs = 20\nrounds = 6\n\
         [verify-sim.strategy]\nkind = \"single-flaw\"\nlabel = \"phi+\"\n",
    );
    let o = hashqkd(&["verify-sim", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let agg = aggregate(&stdout(&o));
    let rate = agg["false_accept"]["rate"].as_f64().unwrap();
    assert!(rate <= 1.0 / 64.0 + 3.0 * (1.0f64 / 64.0 / 4000.0).sqrt(), "{rate}");
}

#[test]
fn dense_foreknowledge_cheat_through_cli() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cheat.toml",
        "kind = \"verify-sim\"\ntrials = 200\n[verify-sim]\npairs = 3\nrounds = 2\nengine = \"dense\"\nkey = true\n\
         [verify-sim.strategy]\nkind = \"foreknowledge\"\nsubsets = [\"001101\", \"1001\"]\nrevealed = true\n",
    );
    let o = hashqkd(&["verify-sim", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let agg = aggregate(&stdout(&o));
    assert_eq!(agg["acceptance"]["rate"], 1.0);
    let recs = records(&stdout(&o));
    for r in recs.iter().filter(|r| r["record"] == "trial") {
        // a key bit fixed by Eve is not a singlet
        assert!(r["honest_fidelity"].as_f64().unwrap() < 0.5 + 1e-9);
    }
}

#[test]
fn oracle_check_passes() {
    let o = hashqkd(&["--trials", "25", "oracle-check"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(aggregate(&stdout(&o))["all_passed"], true);
}

#[test]
fn attack_flips_between_transmittances() {
    let o = hashqkd(&["attack", "--mu", "0.1", "--eta", "1", "--eta", "0.01"]);
    let recs = records(&stdout(&o));
    let feasible: Vec<bool> = recs
        .iter()
        .filter(|r| r["record"] == "trial")
        .map(|r| r["report"]["feasible"].as_bool().unwrap())
        .collect();
    assert_eq!(feasible, vec![false, true]);
}

#[test]
fn repeater_reports_chain() {
    let o = hashqkd(&["--trials", "10", "repeater", "--segments", "2", "--fidelity", "0.9"]);
    assert_eq!(o.status.code(), Some(0));
    let agg = aggregate(&stdout(&o));
    assert_eq!(agg["chain"]["reached_target"], true);
    let below = hashqkd(&["repeater", "--fidelity", "0.5"]);
    assert_eq!(below.status.code(), Some(0));
    assert!(stdout(&below).contains("infeasible"));
}

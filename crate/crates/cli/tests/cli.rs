//! End-to-end tests of the `mbd` binary against the checked-in fixtures.

use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn mbd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mbd"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_lines(out: &Output) -> Vec<String> {
    String::from_utf8_lossy(&out.stdout).lines().map(str::to_string).collect()
}

#[test]
fn diagnose_five_axiom_min_card() {
    let file = fixture("five_axioms.json");
    let out = mbd(&["diagnose", file.to_str().unwrap(), "--algo", "rbfhs", "--ld", "all", "--mode", "mincard"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let lines = stdout_lines(&out);
    assert_eq!(lines.len(), 4);
    let mut sets: Vec<String> =
        lines.iter().map(|l| l.split('\t').next().unwrap().to_string()).collect();
    sets.sort();
    assert_eq!(sets, ["ax1,ax3", "ax1,ax4", "ax2,ax3", "ax2,ax5"]);
}

#[test]
fn all_algorithms_agree_on_the_same_file() {
    let file = fixture("five_axioms.json");
    let mut seen = Vec::new();
    for algo in ["hstree", "rbfhs", "hbfhs"] {
        let out = mbd(&["diagnose", file.to_str().unwrap(), "--algo", algo, "--mode", "maxprob"]);
        assert!(out.status.success(), "{algo}");
        let mut sets: Vec<String> = stdout_lines(&out)
            .iter()
            .map(|l| l.split('\t').next().unwrap().to_string())
            .collect();
        sets.sort();
        seen.push(sets);
    }
    assert_eq!(seen[0], seen[1]);
    assert_eq!(seen[1], seen[2]);
}

#[test]
fn diagnose_seven_component_order() {
    let file = fixture("seven_components.json");
    let out = mbd(&["diagnose", file.to_str().unwrap(), "--algo", "rbfhs", "--ld", "4", "--mode", "maxprob"]);
    assert!(out.status.success());
    let sets: Vec<String> = stdout_lines(&out)
        .iter()
        .map(|l| l.split('\t').next().unwrap().to_string())
        .collect();
    assert_eq!(sets, ["ax1,ax4", "ax1,ax6", "ax4,ax5", "ax2,ax4,ax6"]);
}

#[test]
fn diagnose_consistent_problem_prints_empty_set() {
    let file = fixture("consistent.json");
    let out = mbd(&["diagnose", file.to_str().unwrap()]);
    assert!(out.status.success());
    let lines = stdout_lines(&out);
    assert_eq!(lines.len(), 1);
    assert!(lines[0].starts_with('∅'), "got {:?}", lines[0]);
}

#[test]
fn diagnose_unsolvable_problem_exits_2() {
    let file = fixture("broken.json");
    let out = mbd(&["diagnose", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout_lines(&out).is_empty());
}

#[test]
fn diagnose_bad_flags_exit_1() {
    let file = fixture("five_axioms.json");
    let out = mbd(&["diagnose", file.to_str().unwrap(), "--algo", "rbfhs", "--switch", "nodecount:5"]);
    assert_eq!(out.status.code(), Some(1));
    let out = mbd(&["diagnose", "/nonexistent.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sequential_simulated_session() {
    let file = fixture("five_axioms.json");
    let out = mbd(&["sequential", file.to_str().unwrap(), "--actual", "ax1,ax3", "--selector", "spl"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let lines = stdout_lines(&out);
    assert_eq!(lines.last().map(String::as_str), Some("ax1,ax3"));
    assert!(lines.len() >= 2, "expected at least one probe line");
}

#[test]
fn sequential_rejects_non_minimal_actual() {
    let file = fixture("five_axioms.json");
    let out = mbd(&["sequential", file.to_str().unwrap(), "--actual", "ax1,ax2,ax3"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn interactive_session_matches_simulated_one() {
    let file = fixture("five_axioms.json");
    let auto = mbd(&["sequential", file.to_str().unwrap(), "--actual", "ax1,ax3", "--selector", "ent"]);
    assert!(auto.status.success());
    let auto_lines = stdout_lines(&auto);

    // answer the same probes the simulated session asked
    let answers: String = auto_lines
        .iter()
        .filter(|l| l.starts_with("probe "))
        .map(|l| if l.ends_with("healthy") { "y\n" } else { "n\n" })
        .collect();

    let mut child = Command::new(env!("CARGO_BIN_EXE_mbd"))
        .args(["sequential", file.to_str().unwrap(), "--interactive", "--selector", "ent"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.as_mut().unwrap().write_all(answers.as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    let lines = stdout_lines(&out);
    assert_eq!(lines.last().map(String::as_str), Some("ax1,ax3"));
}

#[test]
fn gen_round_trips_byte_stable() {
    let dir = std::env::temp_dir().join("mbd-cli-test-gen");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("gen.json");
    let out = mbd(&["gen", "--seed", "3", "--components", "9", "--conflicts", "4", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let first = std::fs::read(&path).unwrap();

    // generating again must be deterministic
    let out = mbd(&["gen", "--seed", "3", "--components", "9", "--conflicts", "4"]);
    assert!(out.status.success());
    assert_eq!(first, out.stdout);

    // the generated file is diagnosable
    let out = mbd(&["diagnose", path.to_str().unwrap(), "--mode", "maxprob"]);
    assert!(out.status.success());
    assert!(!stdout_lines(&out).is_empty());
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn metrics_csv_is_appended() {
    let dir = std::env::temp_dir().join("mbd-cli-test-metrics");
    std::fs::create_dir_all(&dir).unwrap();
    let csv = dir.join("metrics.csv");
    std::fs::remove_file(&csv).ok();
    let file = fixture("five_axioms.json");
    for algo in ["hstree", "rbfhs"] {
        let out = mbd(&["diagnose", file.to_str().unwrap(), "--algo", algo, "--metrics", csv.to_str().unwrap()]);
        assert!(out.status.success());
    }
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3, "header plus two rows: {text}");
    assert!(lines[0].starts_with("file,algo,ld,mode,time_ms"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn bench_writes_report_with_memory_factors() {
    let dir = std::env::temp_dir().join("mbd-cli-test-bench");
    std::fs::create_dir_all(&dir).unwrap();
    let csv = dir.join("bench.csv");
    let out = mbd(&["bench", "--seeds", "4", "--sizes", "8,12", "--out", csv.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("scenario,algorithm,ld,mode,selector,time_ms,peak_nodes,conflicts_computed"));
    assert!(text.lines().count() > 4 * 8, "rows for every grid cell");
    let summary = String::from_utf8_lossy(&out.stdout);
    let factor_ge_1 = summary
        .lines()
        .filter(|l| l.contains("memory factor"))
        .any(|l| {
            l.split("memory factor ")
                .nth(1)
                .and_then(|s| s.split(',').next())
                .and_then(|s| s.trim().parse::<f64>().ok())
                .is_some_and(|f| f >= 1.0)
        });
    assert!(factor_ge_1, "no memory factor >= 1 in:\n{summary}");
    std::fs::remove_dir_all(&dir).ok();
}

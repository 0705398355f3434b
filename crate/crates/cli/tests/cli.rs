use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rmt_entangle::ensembles::{EnsembleKind, EnsembleSpec};
use rmt_entangle::export::read_binary;
use serde_json::Value;
use sha2::{Digest, Sha256};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_rmt-entangle"));
    c.env_remove("RMT_ENTANGLE_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, json: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, json).unwrap();
    p
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    out.sort();
    out
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_slice(&fs::read(dir.join("manifest.json")).unwrap()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn identical_config_and_seed_give_identical_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", r#"{"qubit_count": 4, "samples": 6, "seed": 5}"#);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let oa = run(&["counterexamples", "--config", cfg.to_str().unwrap(), "--out", a.to_str().unwrap(), "--threads", "1"]);
    let ob = run(&["counterexamples", "--config", cfg.to_str().unwrap(), "--out", b.to_str().unwrap(), "--threads", "3"]);
    assert_eq!(code(&oa), 0, "{}", String::from_utf8_lossy(&oa.stderr));
    assert_eq!(code(&ob), 0);
    let fa = csv_files(&a);
    assert!(fa.len() >= 5);
    assert_eq!(fa, csv_files(&b));

    let c = tmp.path().join("c");
    let oc = run(&["counterexamples", "--config", cfg.to_str().unwrap(), "--out", c.to_str().unwrap(), "--seed", "6"]);
    assert_eq!(code(&oc), 0);
    assert_ne!(fa, csv_files(&c));
}

#[test]
fn manifest_records_checksums_and_config() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let cfg = write_config(
        tmp.path(),
        "c.json",
        r#"{"experiment": "fig-interpolating", "dim": 16, "deltas": [0.0, 0.5, 1.0], "q_samples": 4, "samples": 3}"#,
    );
    let o = run(&["fig-interpolating", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--q-bins", "10"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&out);
    assert_eq!(m["schema_version"], 1);
    assert_eq!(m["experiment"], "fig-interpolating");
    assert_eq!(m["config"]["dim"], 16);
    assert_eq!(m["resolved"]["bins"]["q"]["count"], 10);
    assert!(m["versions"]["rmt-entangle-core"].is_string());
    assert!(m["wall_clock_seconds"].as_f64().unwrap() >= 0.0);
    let files = m["files"].as_array().unwrap();
    let names: Vec<&str> = files.iter().map(|f| f["name"].as_str().unwrap()).collect();
    for expected in ["element_hist.csv", "eigvec_hist.csv", "spacing_hist.csv", "q_hist.csv", "summary.csv", "reference_curves.csv"] {
        assert!(names.contains(&expected), "{expected} missing from {names:?}");
    }
    for f in files {
        let bytes = fs::read(out.join(f["name"].as_str().unwrap())).unwrap();
        assert_eq!(f["bytes"], bytes.len() as u64);
        assert_eq!(f["sha256"].as_str().unwrap(), hex::encode(Sha256::digest(&bytes)));
    }
    let checks = m["checks"].as_array().unwrap();
    let zero = checks.iter().find(|c| c["name"] == "delta_zero_q_is_zero").unwrap();
    assert_eq!(zero["passed"], true);

    let q_hist = fs::read_to_string(out.join("q_hist.csv")).unwrap();
    let mut lines = q_hist.lines();
    assert_eq!(lines.next(), Some("series,bin_left,bin_right,count,density"));
    let zero_rows: Vec<&str> = lines.filter(|l| l.starts_with("delta=0,")).collect();
    assert_eq!(zero_rows.len(), 10);
    assert!(zero_rows[0].ends_with(",64,10.000000000000"), "{}", zero_rows[0]);
}

#[test]
fn config_errors_exit_2_and_leave_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("never");
    for (i, json) in [
        r#"{"qubit_count": 4, "colour": "red"}"#,
        r#"{"qubit_count": 4, "t_max": 5}"#,
        r#"{"experiment": "fig-maps"}"#,
        r#"{"dim": 12}"#,
        "not json",
    ]
    .iter()
    .enumerate()
    {
        let cfg = write_config(tmp.path(), &format!("bad{i}.json"), json);
        let o = run(&["counterexamples", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 2, "{json}: {}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(code(&run(&["no-such-experiment"])), 2);
    assert_eq!(code(&run(&["counterexamples", "--threads", "0", "--out", out.to_str().unwrap()])), 2);
    assert_eq!(code(&run(&["counterexamples", "--config", "/nonexistent.json"])), 2);
    assert!(!out.exists());
    let leftovers: Vec<_> = fs::read_dir(tmp.path())
        .unwrap()
        .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().contains("partial"))
        .collect();
    assert!(leftovers.is_empty());
}

#[test]
fn failed_gates_exit_4_only_with_check() {
    // eight spacings cannot get a KS distance below 1/16 against any law
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", r#"{"dim": 4, "samples": 2}"#);
    let out = tmp.path().join("ce");
    let plain = run(&["counterexamples", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&plain), 0);
    let checked = run(&["counterexamples", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--check"]);
    assert_eq!(code(&checked), 4);
    let m = manifest(&out);
    let failed: Vec<&str> = m["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert!(failed.contains(&"conjugated_spacing_ks_poisson"));
    assert!(!failed.contains(&"diagonal_q_identically_zero"));
}

#[test]
fn map_traces_cover_every_map_and_time() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", r#"{"qubit_count": 4, "t_max": 10, "hist_times": [1, 10]}"#);
    let out = tmp.path().join("maps");
    let o = run(&["fig-maps", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let traces = fs::read_to_string(out.join("traces.csv")).unwrap();
    let mut lines = traces.lines();
    assert_eq!(lines.next(), Some("t,mean_q,stderr,population_tag"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 5 * 10);
    for tag in ["sawtooth(k=1.5)", "sawtooth(k=-1.5)", "harper(gamma=1)", "harper(gamma=0.1)", "baker"] {
        assert_eq!(rows.iter().filter(|r| r.ends_with(&format!(",{tag}"))).count(), 10, "{tag}");
    }
    // one iteration of the sawtooth maximally entangles every basis state
    assert!(rows.contains(&"1,1.000000000000,0.000000000000,sawtooth(k=1.5)"));
    let hist = fs::read_to_string(out.join("element_hist.csv")).unwrap();
    assert!(hist.lines().any(|l| l.starts_with("baker t=10,")));
}

#[test]
fn interpolating_time_writes_matched_pairs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        r#"{"qubit_count": 4, "samples": 3, "t_max": 6, "pairs": [[2, 1], [6, 2]]}"#,
    );
    let out = tmp.path().join("time");
    let o = run(&["fig-interpolating-time", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let pairs = fs::read_to_string(out.join("matched_pairs.csv")).unwrap();
    let lines: Vec<&str> = pairs.lines().collect();
    assert_eq!(lines[0], "t_slow,t_fast,mean_q_slow,stderr_slow,mean_q_fast,stderr_fast,abs_diff,ks_elements");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("2,1,") && lines[2].starts_with("6,2,"));
    let traces = fs::read_to_string(out.join("traces.csv")).unwrap();
    assert_eq!(traces.lines().count(), 1 + 2 * 6);
}

#[test]
fn dimension_scan_and_pseudorandom_run_small() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "d.json", r#"{"dims": [16, 8, 4], "samples": 3}"#);
    let out = tmp.path().join("dims");
    let o = run(&["fig-dimension-scan", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let table = fs::read_to_string(out.join("delta_q.csv")).unwrap();
    assert_eq!(table.lines().count(), 4);
    assert!(table.lines().nth(2).unwrap().starts_with("3,8,"));

    let cfg = write_config(tmp.path(), "p.json", r#"{"qubit_count": 3, "iterations": [1, 3], "samples": 3}"#);
    let out = tmp.path().join("pr");
    let o = run(&["fig-pseudorandom", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(summary.lines().any(|l| l.starts_with("m=3,ks_q_vs_cue,")));
}

#[test]
fn export_round_trips_through_the_core_reader() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        r#"{"dim": 6, "ensemble": {"kind": "interpolating", "delta": 0.5}, "format": "binary"}"#,
    );
    let out = tmp.path().join("export");
    let o = run(&["export", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--samples", "2", "--seed", "77"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let spec = EnsembleSpec::new(EnsembleKind::Interpolating { delta: 0.5 }, 6, 77).unwrap();
    for i in 0..2u64 {
        let bytes = fs::read(out.join(format!("sample_{i:05}.rmtmat"))).unwrap();
        let (header, m) = read_binary(bytes.as_slice()).unwrap();
        assert_eq!(header.sample_index, i);
        assert_eq!(header.seed, 77);
        assert_eq!(header.params["phase_side"], "left");
        assert_eq!(&m, spec.sample(i).unwrap().matrix());
    }
}

#[test]
fn help_exits_zero() {
    let o = run(&["--help"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8_lossy(&o.stdout);
    for exp in ["fig-interpolating", "fig-pseudorandom", "fig-dimension-scan", "fig-maps", "fig-interpolating-time", "counterexamples"] {
        assert!(text.contains(exp), "{exp}");
    }
}

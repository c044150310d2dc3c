mod common;

use std::process::{Command, Output};

use common::kernel_path;
use qk::placement::CouplingGraph;

fn qkc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qkc")).args(args).output().unwrap()
}

fn kernel(file: &str) -> String {
    kernel_path(file).to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn counts(o: &Output) -> serde_json::Map<String, serde_json::Value> {
    let v: serde_json::Value = serde_json::from_str(stdout(o).trim()).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)));
    v["counts"].as_object().unwrap().clone()
}

#[test]
fn bell_counts() {
    let o = qkc(&["run", &kernel("bell.qk"), "-qpu", "sim", "-shots", "1024", "--seed", "5"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let c = counts(&o);
    assert!(c.keys().all(|k| k == "00" || k == "11"));
    assert_eq!(c.values().map(|v| v.as_u64().unwrap()).sum::<u64>(), 1024);
}

#[test]
fn qpe_reads_100() {
    let o = qkc(&["run", &kernel("qpe.qk"), "--qubits", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).trim(), r#"{"counts":{"100":1024},"shots":1024}"#);
}

#[test]
fn qec_with_injected_error_is_corrected() {
    for i in ["0", "1", "2"] {
        let o = qkc(&["run", &kernel("qec.qk"), "-qrt", "ftqc", "--qubits", "4", "--inject-x", i, "-shots", "16"]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        let c = counts(&o);
        assert_eq!(c.len(), 1);
        assert!(c.keys().next().unwrap().starts_with("111"));
    }
}

#[test]
fn same_seed_same_bytes() {
    let args = ["run", &kernel("ghz.qk"), "--qubits", "5", "--seed", "42", "-opt", "1", "--placement", "sabre", "--coupling-graph", "vigo"];
    let (a, b) = (qkc(&args), qkc(&args));
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let other = qkc(&["run", &kernel("ghz.qk"), "--qubits", "5", "--seed", "43"]);
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn compile_places_on_vigo() {
    let o = qkc(&["compile", &kernel("ghz.qk"), "--qubits", "5", "--placement", "ssp", "--coupling-graph", "vigo"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let vigo = CouplingGraph::builtin("vigo").unwrap();
    let mut pairs = 0;
    for line in text.lines() {
        let mut parts = line.split_whitespace();
        let (Some(gate), Some(ops)) = (parts.next(), parts.next()) else { continue };
        let qs: Vec<usize> = ops.split(',').filter_map(|q| q.trim_start_matches('q').parse().ok()).collect();
        if qs.len() == 2 {
            pairs += 1;
            assert!(vigo.connected(qs[0], qs[1]), "{gate} {ops}");
        }
    }
    assert!(pairs >= 4);
}

#[test]
fn compile_opt_levels() {
    let path = kernel("cancellation.qk");
    let plain = qkc(&["compile", &path]);
    let opt0 = qkc(&["compile", &path, "-opt", "0"]);
    assert_eq!(plain.stdout, opt0.stdout);
    let dir = tempfile::tempdir().unwrap();
    let stats_path = dir.path().join("stats.json");
    let opt1 = qkc(&["compile", &path, "-opt", "1", "--emit-pass-stats", stats_path.to_str().unwrap()]);
    assert_eq!(opt1.status.code(), Some(0), "{}", String::from_utf8_lossy(&opt1.stderr));
    assert!(stdout(&opt1).lines().count() < stdout(&plain).lines().count());
    let stats: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(stats_path).unwrap()).unwrap();
    let stats = stats.as_array().unwrap();
    assert_eq!(stats.len(), 3);
    assert!(stats.first().unwrap()["total_before"].as_u64() > stats.last().unwrap()["total_after"].as_u64());
    let passes = qkc(&["compile", &path, "-opt-pass", "rotation-folding", "-opt-pass", "circuit-optimizer"]);
    assert_eq!(passes.status.code(), Some(0));
}

#[test]
fn paper_flag_spellings() {
    let o = qkc(&[
        "run", &kernel("bell.qk"), "-qpu", "sim", "-shots", "64", "-opt", "1", "-opt-pass", "circuit-optimizer", "-qubit-map",
        "1,0", "-em", "ro-error", "-qrt", "nisq",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let o = qkc(&["run", &kernel("bell.qk"), "-qpu=sim", "-shots=32"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains(r#""shots":32"#));
}

#[test]
fn observable_mode() {
    let o = qkc(&[
        "run", &kernel("deuteron.qk"), "--entry", "ansatz", "--args", "0.5943", "--qubits", "2", "--observable",
        "5.907 - 2.1433 X0 X1 - 2.1433 Y0 Y1 + 0.21829 Z0 - 6.125 Z1", "-shots", "20000",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert!((v["expectation"].as_f64().unwrap() + 1.7489).abs() < 0.15, "{v}");
}

#[test]
fn mitigated_value_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let noise = dir.path().join("noise.json");
    std::fs::write(&noise, r#"{"depolarizing":{"one_qubit":0.001,"two_qubit":0.0}}"#).unwrap();
    let selector = format!("sim[noise-model:{}]", noise.display());
    let raw = qkc(&["run", &kernel("noisy_zero.qk"), "-qpu", &selector, "--seed", "3"]);
    assert!(!stdout(&raw).contains("mitigated"));
    let o = qkc(&["run", &kernel("noisy_zero.qk"), "-qpu", &selector, "-em", "zne", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert!(v["mitigated_exp_val_z"].as_f64().unwrap() > 0.9);
}

#[test]
fn list_subcommands() {
    assert!(stdout(&qkc(&["passes"])).lines().any(|l| l == "circuit-optimizer"));
    assert_eq!(stdout(&qkc(&["placements"])).lines().collect::<Vec<_>>(), vec!["ssp", "sabre"]);
    assert!(stdout(&qkc(&["backends"])).lines().any(|l| l == "sim"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.qk");
    std::fs::write(&bad, "__qpu__ void k(qreg q) {\n  H(q[0];\n}\n").unwrap();
    let o = qkc(&["compile", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.qk:2:"), "{err}");

    assert_eq!(qkc(&["run", &kernel("bell.qk"), "--entry", "nope"]).status.code(), Some(1));
    assert_eq!(qkc(&["run", &kernel("bell.qk"), "-qpu", "ibm"]).status.code(), Some(1));
    assert_eq!(qkc(&["run", &kernel("bell.qk"), "--opt", "3"]).status.code(), Some(1));
    assert_eq!(qkc(&["run", "/no/such/file.qk"]).status.code(), Some(1));
    assert_eq!(qkc(&["run", &kernel("ghz.qk"), "--qubits", "30"]).status.code(), Some(2));
    assert_eq!(qkc(&["run", &kernel("ghz.qk"), "--qubits", "6", "--placement", "ssp", "--coupling-graph", "vigo"]).status.code(), Some(2));
    assert_eq!(qkc(&["frobnicate"]).status.code(), Some(1));
}

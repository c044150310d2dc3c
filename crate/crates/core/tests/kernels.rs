//! The shipped kernel files load and behave as documented.

use std::path::PathBuf;

use qk::backend::{ExecutionMode, QRegBuffer};
use qk::frontend::{KernelArg, KernelRegistry};
use qk::ir::GateKind;
use qk::runtime::QuantumRuntime;

fn kernels_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/kernels")
}

fn load(file: &str) -> KernelRegistry {
    let r = KernelRegistry::new();
    r.load_file(&kernels_dir().join(file)).unwrap_or_else(|e| panic!("{file}: {e}"));
    r
}

fn run(r: &KernelRegistry, name: &str, qubits: usize, args: &[KernelArg], rt: &QuantumRuntime) -> QRegBuffer {
    let mut buf = QRegBuffer::new("q", qubits).unwrap();
    r.invoke(name, &mut buf, args, rt).unwrap_or_else(|e| panic!("{name}: {e}"));
    buf
}

#[test]
fn all_kernel_files_parse() {
    for entry in std::fs::read_dir(kernels_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "qk") || path.file_name().is_some_and(|n| n == "ghz3.qasm") {
            KernelRegistry::new().load_file(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        }
    }
}

#[test]
fn bell_variants_agree() {
    let rt = QuantumRuntime::default().seed(1);
    for (file, name) in [("bell.qk", "bell"), ("bell_mixed.qk", "bell_mixed")] {
        let buf = run(&load(file), name, 2, &[], &rt);
        assert!(buf.counts().keys().all(|k| k == "00" || k == "11"), "{name}: {:?}", buf.counts());
    }
}

#[test]
fn grover_include_and_qasm_file() {
    let r = load("grover.qk");
    let c = r.instantiate("grover", &[KernelArg::Qreg(3)]).unwrap();
    assert_eq!(c.iter().filter(|i| i.kind == GateKind::Measure).count(), 3);
    assert!(c.iter().filter(|i| i.kind == GateKind::CX).count() >= 6);
    let buf = run(&load("ghz3.qasm"), "ghz3", 3, &[], &QuantumRuntime::default());
    assert!(buf.counts().keys().all(|k| k == "000" || k == "111"));
}

#[test]
fn quil_toffoli_row() {
    let buf = run(&load("toffoli_quil.qk"), "toffoli_quil", 3, &[], &QuantumRuntime::default());
    assert_eq!(buf.counts().keys().collect::<Vec<_>>(), vec!["111"]);
}

#[test]
fn qec_cli_kernel_is_deterministic() {
    let rt = QuantumRuntime::default().mode(ExecutionMode::Ftqc).shots(20);
    for inject in -1..3 {
        let buf = run(&load("qec.qk"), "qec", 4, &[KernelArg::Int(inject)], &rt);
        assert_eq!(buf.counts().len(), 1, "inject {inject}: {:?}", buf.counts());
        let key = buf.counts().keys().next().unwrap();
        assert!(key.starts_with("111"), "inject {inject}: {key}");
    }
}

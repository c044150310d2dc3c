mod common;

use common::{phase_distance, to_dense};
use proptest::prelude::*;
use qk::frontend::{decompose_unitary, parse_kernels, KernelArg, KernelRegistry};
use qk::ir::{to_unitary, Circuit, GateKind, Instruction, Matrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SHARED: [GateKind; 12] = [
    GateKind::H,
    GateKind::X,
    GateKind::Y,
    GateKind::Z,
    GateKind::S,
    GateKind::T,
    GateKind::Rx,
    GateKind::Ry,
    GateKind::Rz,
    GateKind::CX,
    GateKind::CZ,
    GateKind::Swap,
];

fn xasm(i: &Instruction) -> String {
    let qs: Vec<String> = i.qubits.iter().map(|q| format!("q[{q}]")).collect();
    let ps: Vec<String> = i.params.iter().map(|p| format!("{p:?}")).collect();
    format!("{}({});", i.kind.name(), [qs, ps].concat().join(", "))
}

fn qasm(i: &Instruction) -> String {
    let name = i.kind.name().to_lowercase().replace("cnot", "cx");
    let qs: Vec<String> = i.qubits.iter().map(|q| format!("q[{q}]")).collect();
    if i.params.is_empty() {
        format!("{name} {};", qs.join(", "))
    } else {
        format!("{name}({:?}) {};", i.params[0], qs.join(", "))
    }
}

fn quil(i: &Instruction) -> String {
    let name = match i.kind {
        GateKind::CX => "CNOT".to_string(),
        GateKind::Swap => "SWAP".to_string(),
        k => k.name().to_uppercase(),
    };
    let qs: Vec<String> = i.qubits.iter().map(|q| q.to_string()).collect();
    if i.params.is_empty() {
        format!("{name} {}", qs.join(" "))
    } else {
        format!("{name}({:?}) {}", i.params[0], qs.join(" "))
    }
}

fn instantiate(src: &str) -> Vec<Instruction> {
    let r = KernelRegistry::new();
    r.jit_compile(src).unwrap_or_else(|e| panic!("{e}\n{src}"));
    r.instantiate("k", &[KernelArg::Qreg(4)]).unwrap().flatten()
}

fn shared_circuit(seed: u64, len: usize) -> Vec<Instruction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| common::random_instruction(&mut rng, 4, &SHARED)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parse_never_panics(bytes in proptest::collection::vec(any::<u8>(), 0..200)) {
        let text = String::from_utf8_lossy(&bytes);
        let _ = parse_kernels(&text);
        let _ = parse_kernels(&format!("__qpu__ void k(qreg q) {{ {text} }}"));
        let _ = parse_kernels(&format!("__qpu__ void k(qreg q) {{ using qcor::openqasm; {text} }}"));
        let _ = parse_kernels(&format!("__qpu__ void k(qreg q) {{ using qcor::quil;\n{text} }}"));
    }

    #[test]
    fn token_soup_never_panics(words in proptest::collection::vec(
        prop::sample::select(vec!["(", ")", "{", "}", "[", "]", ";", ",", "q", "0", "1.5", "for", "if", "int", "H", "CX",
            "Measure", "using", "qcor::openqasm;", "qcor::quil;", "decompose", "=", "<", "++", "-", "\n", "qreg", "__qpu__", "void"]),
        0..60)) {
        let _ = parse_kernels(&words.join(" "));
    }

    #[test]
    fn languages_agree(seed in any::<u64>(), len in 1usize..25) {
        let circuit = shared_circuit(seed, len);
        let body = |f: fn(&Instruction) -> String| circuit.iter().map(f).collect::<Vec<_>>().join("\n");
        let a = instantiate(&format!("__qpu__ void k(qreg q) {{\n{}\n}}", body(xasm)));
        let b = instantiate(&format!("__qpu__ void k(qreg q) {{\nusing qcor::openqasm;\n{}\n}}", body(qasm)));
        let c = instantiate(&format!("__qpu__ void k(qreg q) {{\nusing qcor::quil;\n{}\n}}", body(quil)));
        prop_assert_eq!(&a, &circuit);
        prop_assert_eq!(&b, &circuit);
        prop_assert_eq!(&c, &circuit);
    }

    #[test]
    fn synthesis_reproduces_random_unitaries(seed in any::<u64>(), n in 1usize..=3) {
        let u = to_unitary(&common::random_circuit(seed, n, 12), n).unwrap();
        let targets: Vec<usize> = (0..n).collect();
        let c = decompose_unitary(&u, &targets, 1e-8).unwrap();
        let back = to_unitary(&c, n).unwrap();
        prop_assert!(phase_distance(&to_dense(&back), &to_dense(&u)) < 1e-8);
    }
}

#[test]
fn composition_is_transparent() {
    let r = KernelRegistry::new();
    r.jit_compile(
        "__qpu__ void inner(qreg q, double t) { H(q[0]); Rz(q[1], t); CX(q[0], q[1]); }
         __qpu__ void outer(qreg q) { X(q[1]); inner(q, 0.5); }",
    )
    .unwrap();
    let fresh = r.instantiate("inner", &[KernelArg::Qreg(2), KernelArg::Real(0.5)]).unwrap();
    let mut parent = Circuit::from_instructions("p", [Instruction::x(1)]);
    r.instantiate_into("inner", &[KernelArg::Qreg(2), KernelArg::Real(0.5)], &mut parent).unwrap();
    let mut expected = vec![Instruction::x(1)];
    expected.extend(fresh.flatten());
    assert_eq!(parent.flatten(), expected);
    assert_eq!(r.instantiate("outer", &[KernelArg::Qreg(2)]).unwrap().flatten(), expected);
}

#[test]
fn toffoli_matrix_synthesis() {
    let mut rows = vec![vec![0.0; 8]; 8];
    for (i, row) in rows.iter_mut().enumerate() {
        row[match i {
            6 => 7,
            7 => 6,
            i => i,
        }] = 1.0;
    }
    let m = Matrix::from_real_rows(&rows);
    let c = decompose_unitary(&m, &[0, 1, 2], 1e-8).unwrap();
    assert!(phase_distance(&to_dense(&to_unitary(&c, 3).unwrap()), &to_dense(&m)) < 1e-8);
}

mod common;

use std::collections::BTreeMap;

use common::{phase_distance, random_circuit, to_dense, CMat};
use num_complex::Complex64;
use proptest::prelude::*;
use qk::backend::{Backend, ExecRequest, QRegBuffer, StatevectorSimulator};
use qk::ir::{to_unitary, Circuit, Instruction};
use qk::placement::{place, verify, CouplingGraph, PlacementError, Strategy};

/// Moves the bit of logical qubit `i` to position `map[i]`.
fn permutation(map: &[usize]) -> CMat {
    let d = 1 << map.len();
    let mut p = CMat::zeros(d, d);
    for x in 0..d {
        let y = map.iter().enumerate().fold(0, |acc, (i, &m)| acc | ((x >> i & 1) << m));
        p[(y, x)] = Complex64::new(1.0, 0.0);
    }
    p
}

fn graph(kind: u8, n: usize) -> CouplingGraph {
    match (kind, n) {
        (0, 5) => CouplingGraph::builtin("vigo").unwrap(),
        (1, _) => CouplingGraph::new(n, (0..n).map(|i| (i, (i + 1) % n)).filter(|(a, b)| a != b)).unwrap(),
        _ => CouplingGraph::line(n),
    }
}

fn distribution(circuit: &Circuit, n: usize) -> BTreeMap<String, f64> {
    let mut buf = QRegBuffer::new("q", n).unwrap();
    StatevectorSimulator::new().execute(circuit, &mut buf, &ExecRequest::exact()).unwrap();
    buf.distribution().unwrap().clone()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn placed_unitary_is_permuted_logical(seed in any::<u64>(), n in 2usize..=5, kind in 0u8..3, sabre in any::<bool>()) {
        let c = random_circuit(seed, n, 25);
        let g = graph(kind, n);
        let strategy = if sabre { Strategy::Sabre } else { Strategy::Ssp };
        let placed = place(&c, &g, strategy, None).unwrap();
        verify(&placed.circuit, &g).unwrap();
        let u_log = to_dense(&to_unitary(&c, n).unwrap());
        let u_phys = to_dense(&to_unitary(&placed.circuit, n).unwrap());
        let expected = permutation(&placed.final_map) * u_log * permutation(&placed.initial_map).adjoint();
        prop_assert!(phase_distance(&u_phys, &expected) < 1e-9);
    }

}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn placed_readout_matches_logical(seed in any::<u64>(), sabre in any::<bool>()) {
        let mut c = random_circuit(seed, 5, 20);
        c.extend((0..5).map(Instruction::measure));
        let g = CouplingGraph::builtin("vigo").unwrap();
        let strategy = if sabre { Strategy::Sabre } else { Strategy::Ssp };
        let placed = place(&c, &g, strategy, None).unwrap();
        verify(&placed.circuit, &g).unwrap();
        // Routed measurements need not be terminal, so the placed side is sampled.
        let exact = distribution(&c, 5);
        let mut buf = QRegBuffer::new("q", 5).unwrap();
        StatevectorSimulator::new().execute(&placed.circuit, &mut buf, &ExecRequest::sampled(10_000, seed)).unwrap();
        let sampled: BTreeMap<String, f64> = buf.counts().iter().map(|(k, &v)| (k.clone(), v as f64 / 10_000.0)).collect();
        let keys: std::collections::BTreeSet<&String> = exact.keys().chain(sampled.keys()).collect();
        let tv: f64 = keys.into_iter().map(|k| (exact.get(k).unwrap_or(&0.0) - sampled.get(k).unwrap_or(&0.0)).abs()).sum::<f64>() / 2.0;
        prop_assert!(tv < 0.05, "tv {}", tv);
    }
}

#[test]
fn satisfied_circuit_is_untouched() {
    let c = Circuit::from_instructions("c", [Instruction::h(0), Instruction::cx(0, 1), Instruction::cx(1, 2)]);
    let r = place(&c, &CouplingGraph::line(3), Strategy::Ssp, None).unwrap();
    assert_eq!(r.added_two_qubit_gates, 0);
    assert_eq!(r.circuit.flatten(), c.flatten());
}

#[test]
fn placement_errors() {
    let c = Circuit::from_instructions("c", [Instruction::cx(0, 5)]);
    assert!(matches!(place(&c, &CouplingGraph::line(3), Strategy::Ssp, None), Err(PlacementError::GraphTooSmall { .. })));
    let split = CouplingGraph::new(4, [(0, 1), (2, 3)]).unwrap();
    let c = Circuit::from_instructions("c", [Instruction::cx(0, 2)]);
    assert!(matches!(place(&c, &split, Strategy::Ssp, None), Err(PlacementError::DisconnectedGraph)));
}

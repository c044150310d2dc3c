mod common;

use common::{phase_distance, random_circuit, redundant_circuit, to_dense};
use proptest::prelude::*;
use qk::frontend::KernelArg;
use qk::ir::{to_unitary, Circuit, Instruction};
use qk::passes::{OptLevel, PassManager};

fn check_pass(name: &str, c: &Circuit, n: usize) -> Result<(), TestCaseError> {
    let pm = PassManager::new();
    let (out, stats) = pm.run_pass(name, c).unwrap();
    let before = to_dense(&to_unitary(c, n).unwrap());
    let after = to_dense(&to_unitary(&out, n).unwrap());
    prop_assert!(phase_distance(&after, &before) < 1e-9, "{name} changed the unitary");
    prop_assert!(out.stats().total_gates <= c.stats().total_gates, "{name} grew the circuit");
    prop_assert_eq!(stats.gates_after.total_gates, out.stats().total_gates);
    let (again, _) = pm.run_pass(name, &out).unwrap();
    prop_assert_eq!(again.flatten(), out.flatten(), "{} is not idempotent", name);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn every_pass_is_sound(seed in any::<u64>(), n in 1usize..=6, len in 0usize..40, redundant in any::<bool>()) {
        let c = if redundant { redundant_circuit(seed, n, len) } else { random_circuit(seed, n, len) };
        for name in OptLevel::new(1).unwrap().passes() {
            check_pass(name, &c, n)?;
        }
    }

    #[test]
    fn level_one_with_measure_suffix(seed in any::<u64>(), n in 1usize..=5, len in 0usize..30) {
        let mut c = redundant_circuit(seed, n, len);
        let prefix = c.clone();
        c.extend((0..n).map(Instruction::measure));
        let (out, _) = PassManager::new().run_level(OptLevel::new(1).unwrap(), &c).unwrap();
        let flat = out.flatten();
        let split = flat.len() - n;
        prop_assert!(flat[split..].iter().all(|i| i.kind == qk::ir::GateKind::Measure));
        let body = Circuit::from_instructions("b", flat[..split].iter().cloned());
        prop_assert!(phase_distance(&to_dense(&to_unitary(&body, n).unwrap()), &to_dense(&to_unitary(&prefix, n).unwrap())) < 1e-9);
        prop_assert!(flat.len() <= c.flatten().len());
    }
}

#[test]
fn level_zero_is_empty_and_levels_above_one_fail() {
    assert!(OptLevel::new(0).unwrap().passes().is_empty());
    assert_eq!(OptLevel::new(1).unwrap().passes(), &["rotation-folding", "single-qubit-gate-merging", "circuit-optimizer"]);
    assert!(OptLevel::new(2).is_err());
    assert!(PassManager::new().run_pass("voqc", &Circuit::new("c")).is_err());
}

#[test]
fn cancellation_corpus_shrinks() {
    let r = common::load("cancellation.qk");
    let c = r.instantiate("cancellation", &[KernelArg::Qreg(3)]).unwrap();
    let (out, stats) = PassManager::new().run_level(OptLevel::new(1).unwrap(), &c).unwrap();
    assert!(out.flatten().len() < c.flatten().len());
    for s in &stats {
        let expected = if s.gates_before.total_gates == 0 { 0.0 } else { 1.0 - s.gates_after.total_gates as f64 / s.gates_before.total_gates as f64 };
        assert!((s.reduction_fraction - expected).abs() < 1e-12);
    }
}

//! Pattern-matching cleanup: adjacent inverse pairs and identity rotations.

use std::f64::consts::TAU;

use super::{is_zero_angle, next_on, Pass};
use crate::ir::{GateKind, Instruction};

/// Removes adjacent inverse pairs (`H·H`, `CX·CX`, `S·Sdg`, ...) and rotations by a multiple
/// of a full turn, repeating until nothing changes. Two instructions are adjacent when no
/// instruction between them touches a qubit they share.
pub struct CircuitOptimizer;

fn cancels(a: &Instruction, b: &Instruction) -> bool {
    use GateKind::*;
    let same_qubits = a.qubits == b.qubits;
    let symmetric = matches!(a.kind, CZ | Swap) && a.qubits.len() == 2 && a.qubits[0] == b.qubits[1] && a.qubits[1] == b.qubits[0];
    if !(same_qubits || symmetric) {
        return false;
    }
    matches!(
        (a.kind, b.kind),
        (H, H) | (X, X) | (Y, Y) | (Z, Z) | (CX, CX) | (CY, CY) | (CZ, CZ) | (CH, CH) | (Swap, Swap)
            | (S, Sdg) | (Sdg, S) | (T, Tdg) | (Tdg, T)
    )
}

/// True for rotations equal to the identity, up to global phase.
fn is_identity_rotation(inst: &Instruction) -> bool {
    use GateKind::*;
    match inst.kind {
        Rx | Ry | Rz | U1 | CPhase => is_zero_angle(inst.params[0]),
        // A controlled full turn is a Z on the control, so only multiples of 4π vanish.
        CRz => is_zero_angle(inst.params[0] / 2.0) && (inst.params[0] / TAU).round() as i64 % 2 == 0,
        U3 => is_zero_angle(inst.params[0]) && is_zero_angle(inst.params[1] + inst.params[2]),
        _ => false,
    }
}

fn sweep(insts: &mut [Option<Instruction>]) -> bool {
    let mut changed = false;
    for i in 0..insts.len() {
        let Some(a) = insts[i].as_ref() else { continue };
        if !a.is_unitary() {
            continue;
        }
        if is_identity_rotation(a) {
            insts[i] = None;
            changed = true;
            continue;
        }
        let nexts: Vec<Option<usize>> = a.qubits.iter().map(|&q| next_on(insts, i, q)).collect();
        let Some(Some(j)) = nexts.first().copied() else { continue };
        if nexts.iter().any(|n| *n != Some(j)) {
            continue;
        }
        let b = insts[j].as_ref().expect("next_on returns live slots");
        if b.qubits.len() == a.qubits.len() && cancels(a, b) {
            insts[i] = None;
            insts[j] = None;
            changed = true;
        }
    }
    changed
}

impl Pass for CircuitOptimizer {
    fn name(&self) -> &str {
        "circuit-optimizer"
    }

    fn apply(&self, instructions: &[Instruction]) -> Vec<Instruction> {
        let mut insts: Vec<Option<Instruction>> = instructions.iter().cloned().map(Some).collect();
        while sweep(&mut insts) {}
        insts.into_iter().flatten().collect()
    }
}

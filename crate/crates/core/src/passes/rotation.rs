//! Same-axis rotation merging across commuting gates.

use super::{is_zero_angle, wrap_angle, Pass};
use crate::ir::{GateKind, Instruction};

/// Merges rotations about the same axis on the same qubits when only gates that commute with
/// them sit in between. The merged angle lands on the later rotation.
pub struct RotationFolding;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Axis {
    X,
    Y,
    Z,
}

fn axis(inst: &Instruction) -> Option<Axis> {
    use GateKind::*;
    match inst.kind {
        Rx => Some(Axis::X),
        Ry => Some(Axis::Y),
        Rz | U1 | CPhase => Some(Axis::Z),
        _ => None,
    }
}

/// Whether `inst` commutes with a rotation about `axis` acting on `qubit`.
fn commutes(inst: &Instruction, axis: Axis, qubit: usize) -> bool {
    use GateKind::*;
    if !inst.is_unitary() {
        return false;
    }
    let is_control = inst.qubits.len() == 2 && inst.qubits[0] == qubit;
    let is_target = inst.qubits.len() == 2 && inst.qubits[1] == qubit;
    match axis {
        Axis::Z => inst.kind.is_diagonal() || (is_control && matches!(inst.kind, CX | CY | CH)),
        Axis::X => matches!(inst.kind, Rx | X) || (is_target && inst.kind == CX),
        Axis::Y => matches!(inst.kind, Ry | Y) || (is_target && inst.kind == CY),
    }
}

fn mergeable(a: &Instruction, b: &Instruction) -> bool {
    use GateKind::*;
    match (a.kind, b.kind) {
        (Rz | U1, Rz | U1) | (Rx, Rx) | (Ry, Ry) => a.qubits == b.qubits,
        (CPhase, CPhase) => a.qubits == b.qubits || (a.qubits[0] == b.qubits[1] && a.qubits[1] == b.qubits[0]),
        _ => false,
    }
}

fn sweep(insts: &mut [Option<Instruction>]) -> bool {
    let mut changed = false;
    for i in 0..insts.len() {
        let Some(a) = insts[i].as_ref() else { continue };
        let Some(ax) = axis(a) else { continue };
        if is_zero_angle(a.params[0]) {
            insts[i] = None;
            changed = true;
            continue;
        }
        let mut partner = None;
        for j in i + 1..insts.len() {
            let Some(b) = insts[j].as_ref() else { continue };
            if !a.qubits.iter().any(|&q| b.touches(q)) {
                continue;
            }
            if mergeable(a, b) {
                partner = Some(j);
                break;
            }
            if !a.qubits.iter().all(|&q| !b.touches(q) || commutes(b, ax, q)) {
                break;
            }
        }
        if let Some(j) = partner {
            let angle = a.params[0];
            let b = insts[j].as_mut().expect("partner is live");
            b.params[0] = wrap_angle(b.params[0] + angle);
            if is_zero_angle(b.params[0]) {
                insts[j] = None;
            }
            insts[i] = None;
            changed = true;
        }
    }
    changed
}

impl Pass for RotationFolding {
    fn name(&self) -> &str {
        "rotation-folding"
    }

    fn apply(&self, instructions: &[Instruction]) -> Vec<Instruction> {
        let mut insts: Vec<Option<Instruction>> = instructions.iter().cloned().map(Some).collect();
        while sweep(&mut insts) {}
        insts.into_iter().flatten().collect()
    }
}

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use super::decompose::{controlled_single_qubit, toffoli};
use super::{Circuit, GateKind, Instruction, IrError, Node};

/// Reverses the circuit and inverts every instruction. The tree shape is preserved.
pub fn adjoint(circuit: &Circuit) -> Result<Circuit, IrError> {
    let mut children = Vec::with_capacity(circuit.children.len());
    for node in circuit.children.iter().rev() {
        children.push(match node {
            Node::Inst(inst) => Node::Inst(inst.inverse()?),
            Node::Sub(sub) => Node::Sub(adjoint(sub)?),
        });
    }
    Ok(Circuit { name: circuit.name.clone(), children })
}

/// Conditions every instruction of `circuit` on `control`.
///
/// Single-qubit gates map to their two-qubit controlled kinds where one exists; everything
/// else is lowered to exact CX-plus-single-qubit networks, with CX becoming a Toffoli network.
pub fn controlled(circuit: &Circuit, control: usize) -> Result<Circuit, IrError> {
    if let Some(kind) = circuit.first_non_unitary() {
        return Err(IrError::ControlOfNonUnitary(kind));
    }
    if circuit.iter().any(|i| i.touches(control)) {
        return Err(IrError::ControlQubitInUse(control));
    }
    Ok(control_tree(circuit, control))
}

fn control_tree(circuit: &Circuit, control: usize) -> Circuit {
    let mut out = Circuit::new(circuit.name.clone());
    for node in &circuit.children {
        match node {
            Node::Inst(inst) => out.extend(control_instruction(inst, control)),
            Node::Sub(sub) => out.push_circuit(control_tree(sub, control)),
        }
    }
    out
}

fn control_instruction(inst: &Instruction, c: usize) -> Vec<Instruction> {
    use GateKind::*;
    if inst.qubits.len() == 1 {
        let t = inst.qubits[0];
        let two = |kind| vec![Instruction::two(kind, c, t)];
        return match inst.kind {
            X => two(CX),
            Y => two(CY),
            Z => two(CZ),
            H => two(CH),
            S => vec![Instruction::cphase(c, t, FRAC_PI_2)],
            Sdg => vec![Instruction::cphase(c, t, -FRAC_PI_2)],
            T => vec![Instruction::cphase(c, t, FRAC_PI_4)],
            Tdg => vec![Instruction::cphase(c, t, -FRAC_PI_4)],
            U1 => vec![Instruction::cphase(c, t, inst.params[0])],
            Rz => vec![Instruction::crz(c, t, inst.params[0])],
            _ => controlled_single_qubit(&inst.matrix().expect("unitary"), c, t),
        };
    }
    let (a, b) = (inst.qubits[0], inst.qubits[1]);
    if inst.kind == CX {
        return toffoli(c, a, b);
    }
    lower_two_qubit(inst)
        .iter()
        .flat_map(|piece| control_instruction(piece, c))
        .collect()
}

/// Exact rewrite of a non-CX two-qubit gate into CX and single-qubit gates.
fn lower_two_qubit(inst: &Instruction) -> Vec<Instruction> {
    use GateKind::*;
    let (a, b) = (inst.qubits[0], inst.qubits[1]);
    match inst.kind {
        CY => vec![Instruction::one(Sdg, b), Instruction::cx(a, b), Instruction::one(S, b)],
        CZ => vec![Instruction::h(b), Instruction::cx(a, b), Instruction::h(b)],
        CRz => {
            let t = inst.params[0];
            vec![Instruction::rz(b, t / 2.0), Instruction::cx(a, b), Instruction::rz(b, -t / 2.0), Instruction::cx(a, b)]
        }
        CPhase => {
            let t = inst.params[0];
            vec![
                Instruction::rotation(U1, a, t / 2.0),
                Instruction::cx(a, b),
                Instruction::rotation(U1, b, -t / 2.0),
                Instruction::cx(a, b),
                Instruction::rotation(U1, b, t / 2.0),
            ]
        }
        CH => controlled_single_qubit(&H.matrix(&[]).expect("unitary"), a, b),
        Swap => vec![Instruction::cx(a, b), Instruction::cx(b, a), Instruction::cx(a, b)],
        other => unreachable!("{other} is not a lowered two-qubit gate"),
    }
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;

    use super::*;
    use crate::ir::{to_unitary, Matrix};

    #[test]
    fn adjoint_examples() {
        let c = Circuit::from_instructions("h", [Instruction::h(0)]);
        assert_eq!(adjoint(&c).unwrap(), c);
        let c = Circuit::from_instructions("rc", [Instruction::rz(0, 0.3), Instruction::cx(0, 1)]);
        assert_eq!(
            adjoint(&c).unwrap().flatten(),
            vec![Instruction::cx(0, 1), Instruction::rz(0, -0.3)]
        );
        let m = Circuit::from_instructions("m", [Instruction::measure(0)]);
        assert_eq!(adjoint(&m), Err(IrError::AdjointOfNonUnitary(GateKind::Measure)));
    }

    #[test]
    fn controlled_t_is_cphase_quarter_pi() {
        let c = Circuit::from_instructions("t", [Instruction::one(GateKind::T, 1)]);
        let u = to_unitary(&controlled(&c, 0).unwrap(), 2).unwrap();
        let mut expect = Matrix::identity(4);
        expect[(3, 3)] = Complex64::from_polar(1.0, FRAC_PI_4);
        assert!(u.approx_eq(&expect, 1e-12));
    }

    #[test]
    fn controlled_errors_and_empty() {
        let empty = Circuit::new("e");
        assert!(controlled(&empty, 0).unwrap().is_empty());
        let m = Circuit::from_instructions("m", [Instruction::measure(1)]);
        assert_eq!(controlled(&m, 0), Err(IrError::ControlOfNonUnitary(GateKind::Measure)));
        let x = Circuit::from_instructions("x", [Instruction::x(0)]);
        assert_eq!(controlled(&x, 0), Err(IrError::ControlQubitInUse(0)));
    }

    #[test]
    fn every_gate_kind_controls_exactly() {
        for kind in GateKind::ALL.into_iter().filter(|k| k.is_unitary()) {
            let params = vec![0.37; kind.param_count()];
            let qubits = if kind.arity() == 1 { vec![1] } else { vec![1, 2] };
            let inst = Instruction::new(kind, qubits, params).unwrap();
            let c = Circuit::from_instructions("g", [inst]);
            let got = to_unitary(&controlled(&c, 0).unwrap(), 3).unwrap();
            let base = to_unitary(&c, 3).unwrap();
            for col in 0..8 {
                for row in 0..8 {
                    let expect = if col & 1 == 1 {
                        base[(row, col)]
                    } else if row == col {
                        Complex64::new(1.0, 0.0)
                    } else {
                        Complex64::new(0.0, 0.0)
                    };
                    assert!((got[(row, col)] - expect).norm() < 1e-10, "{kind} ({row},{col})");
                }
            }
        }
    }
}

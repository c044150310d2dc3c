use num_complex::Complex64;

use super::{Circuit, IrError, Matrix};

pub const MAX_UNITARY_QUBITS: usize = 10;

/// Applies a one- or two-qubit gate matrix to a statevector in place.
///
/// `qubits[0]` is the least-significant bit of the gate's local index.
pub fn apply_matrix(state: &mut [Complex64], qubits: &[usize], m: &Matrix) {
    match qubits {
        [q] => {
            let bit = 1usize << q;
            let (m00, m01, m10, m11) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
            for i in 0..state.len() {
                if i & bit == 0 {
                    let j = i | bit;
                    let (a, b) = (state[i], state[j]);
                    state[i] = m00 * a + m01 * b;
                    state[j] = m10 * a + m11 * b;
                }
            }
        }
        [q0, q1] => {
            let (b0, b1) = (1usize << q0, 1usize << q1);
            for i in 0..state.len() {
                if i & (b0 | b1) == 0 {
                    let idx = [i, i | b0, i | b1, i | b0 | b1];
                    let v = idx.map(|k| state[k]);
                    for (r, &k) in idx.iter().enumerate() {
                        state[k] = (0..4).map(|c| m[(r, c)] * v[c]).sum();
                    }
                }
            }
        }
        _ => panic!("apply_matrix supports one- and two-qubit gates, got {}", qubits.len()),
    }
}

/// Product of gate embeddings in flattened order, on `n_qubits` qubits.
pub fn to_unitary(circuit: &Circuit, n_qubits: usize) -> Result<Matrix, IrError> {
    if n_qubits > MAX_UNITARY_QUBITS {
        return Err(IrError::TooManyQubits { max: MAX_UNITARY_QUBITS, got: n_qubits });
    }
    let dim = 1usize << n_qubits;
    let mut gates = Vec::new();
    for inst in circuit.iter() {
        let m = inst.matrix().ok_or(IrError::NonUnitaryInstruction(inst.kind))?;
        if let Some(&q) = inst.qubits.iter().find(|&&q| q >= n_qubits) {
            return Err(IrError::QubitOutOfRange { qubit: q, n_qubits });
        }
        gates.push((inst.qubits.as_slice(), m));
    }
    let mut out = Matrix::zeros(dim);
    let mut column = vec![Complex64::new(0.0, 0.0); dim];
    for c in 0..dim {
        column.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        column[c] = Complex64::new(1.0, 0.0);
        for (qubits, m) in &gates {
            apply_matrix(&mut column, qubits, m);
        }
        for (r, &z) in column.iter().enumerate() {
            out[(r, c)] = z;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_1_SQRT_2;

    use super::*;
    use crate::ir::{GateKind, Instruction};

    #[test]
    fn single_gates() {
        let x = to_unitary(&Circuit::from_instructions("x", [Instruction::x(0)]), 1).unwrap();
        assert!(x.approx_eq(&Matrix::from_real_rows(&[[0.0, 1.0], [1.0, 0.0]]), 0.0));
        let h = to_unitary(&Circuit::from_instructions("h", [Instruction::h(0)]), 1).unwrap();
        let expect =
            Matrix::from_real_rows(&[[FRAC_1_SQRT_2, FRAC_1_SQRT_2], [FRAC_1_SQRT_2, -FRAC_1_SQRT_2]]);
        assert!(h.approx_eq(&expect, 1e-15));
    }

    #[test]
    fn little_endian_embedding() {
        // X on qubit 1 of 2 maps |00> (0) to |q1=1> (2).
        let u = to_unitary(&Circuit::from_instructions("x1", [Instruction::x(1)]), 2).unwrap();
        assert_eq!(u[(2, 0)], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn errors() {
        let m = Circuit::from_instructions("m", [Instruction::measure(0)]);
        assert_eq!(to_unitary(&m, 1), Err(IrError::NonUnitaryInstruction(GateKind::Measure)));
        assert!(matches!(to_unitary(&Circuit::new("e"), 11), Err(IrError::TooManyQubits { .. })));
        let wide = Circuit::from_instructions("w", [Instruction::x(3)]);
        assert!(matches!(to_unitary(&wide, 2), Err(IrError::QubitOutOfRange { .. })));
    }
}

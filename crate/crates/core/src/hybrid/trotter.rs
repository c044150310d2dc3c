use super::{HybridError, Pauli, PauliOperator};
use crate::ir::{Circuit, GateKind, Instruction};

/// Tolerance on the imaginary part of a generator coefficient.
pub const REAL_COEFF_TOL: f64 = 1e-9;

/// First-order, single-step Trotter circuit for `exp(-i·theta·op)`.
///
/// Each term `c·P` becomes a basis change onto Z, a CX ladder onto the last qubit of the
/// term, `Rz(2·theta·c)`, and the mirror image. Identity terms only contribute a global
/// phase and emit nothing.
pub fn exp_i_theta(theta: f64, op: &PauliOperator) -> Result<Circuit, HybridError> {
    let mut c = Circuit::new("exp_i_theta");
    for (string, coeff) in op.terms() {
        if coeff.im.abs() > REAL_COEFF_TOL {
            return Err(HybridError::ComplexCoefficient { term: string.to_string(), imag: coeff.im });
        }
        let factors = string.factors();
        if factors.is_empty() {
            continue;
        }
        let mut basis = Vec::new();
        for &(q, p) in factors {
            match p {
                Pauli::X => basis.push(Instruction::h(q)),
                Pauli::Y => {
                    basis.push(Instruction::one(GateKind::Sdg, q));
                    basis.push(Instruction::h(q));
                }
                Pauli::Z => {}
            }
        }
        let ladder: Vec<Instruction> = factors.windows(2).map(|w| Instruction::cx(w[0].0, w[1].0)).collect();
        let last = factors[factors.len() - 1].0;
        c.extend(basis.iter().cloned());
        c.extend(ladder.iter().cloned());
        c.push(Instruction::rz(last, 2.0 * theta * coeff.re));
        c.extend(ladder.iter().rev().cloned());
        c.extend(basis.iter().rev().map(|i| i.inverse().expect("basis change is unitary")));
    }
    Ok(c)
}

//! Turning an operator and an unmeasured circuit into measured circuits, and estimating
//! expectation values from their parities.

use num_complex::Complex64;

use super::{HybridError, Pauli, PauliOperator, PauliString};
use crate::backend::{Backend, ExecRequest, QRegBuffer, StateVector, StatevectorSimulator};
use crate::ir::{Circuit, GateKind, Instruction};

/// Largest imaginary residue tolerated on an observable's coefficients.
pub const HERMITIAN_TOL: f64 = 1e-9;

/// One non-identity term with the circuit that measures it.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasuredTerm {
    pub coefficient: Complex64,
    pub term: PauliString,
    pub circuit: Circuit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    /// Coefficient of the identity term.
    pub offset: Complex64,
    pub terms: Vec<MeasuredTerm>,
}

/// Appends the basis change and measurements that read out `term` as a Z parity.
pub fn measure_term(circuit: &Circuit, term: &PauliString) -> Circuit {
    let mut out = Circuit::new(format!("{}_{}", circuit.name, term));
    out.extend(circuit.iter().cloned());
    for &(q, p) in term.factors() {
        match p {
            Pauli::X => out.push(Instruction::h(q)),
            Pauli::Y => {
                out.push(Instruction::one(GateKind::Sdg, q));
                out.push(Instruction::h(q));
            }
            Pauli::Z => {}
        }
    }
    out.extend(term.qubits().map(Instruction::measure));
    out
}

pub fn observe(op: &PauliOperator, circuit: &Circuit) -> Result<Observation, HybridError> {
    if circuit.has_measurement() {
        return Err(HybridError::AlreadyMeasured);
    }
    let mut offset = Complex64::new(0.0, 0.0);
    let mut terms = Vec::new();
    for (string, &coefficient) in op.terms() {
        if string.is_identity() {
            offset += coefficient;
        } else {
            terms.push(MeasuredTerm { coefficient, term: string.clone(), circuit: measure_term(circuit, string) });
        }
    }
    Ok(Observation { offset, terms })
}

fn check_hermitian(op: &PauliOperator) -> Result<(), HybridError> {
    match op.terms().find(|(_, c)| c.im.abs() > HERMITIAN_TOL) {
        Some((term, c)) => Err(HybridError::NonHermitianOperator { term: term.to_string(), imag: c.im }),
        None => Ok(()),
    }
}

/// `⟨op⟩` on the state `circuit` prepares, one backend run per term. Term `k` uses seed
/// `request.seed + k`.
pub fn expectation(
    op: &PauliOperator,
    circuit: &Circuit,
    n_qubits: usize,
    backend: &dyn Backend,
    request: &ExecRequest,
) -> Result<f64, HybridError> {
    check_hermitian(op)?;
    let obs = observe(op, circuit)?;
    let mut total = obs.offset.re;
    for (k, t) in obs.terms.iter().enumerate() {
        let mut buffer = QRegBuffer::new("obs", n_qubits)?;
        let req = ExecRequest { seed: request.seed.wrapping_add(k as u64), ..*request };
        backend.execute(&t.circuit, &mut buffer, &req)?;
        total += t.coefficient.re * buffer.exp_val_z()?;
    }
    Ok(total)
}

/// `⟨ψ|P|ψ⟩` for one Pauli string, computed on the amplitudes.
pub fn pauli_expectation(state: &StateVector, term: &PauliString) -> Complex64 {
    let amps = state.amplitudes();
    let mut flip = 0usize;
    for &(q, p) in term.factors() {
        if p != Pauli::Z {
            flip |= 1 << q;
        }
    }
    let i = Complex64::new(0.0, 1.0);
    let mut acc = Complex64::new(0.0, 0.0);
    for (idx, &a) in amps.iter().enumerate() {
        // P|idx⟩ = phase |idx ^ flip⟩
        let mut phase = Complex64::new(1.0, 0.0);
        for &(q, p) in term.factors() {
            let bit = idx >> q & 1 == 1;
            phase *= match (p, bit) {
                (Pauli::X, _) => Complex64::new(1.0, 0.0),
                (Pauli::Y, false) => i,
                (Pauli::Y, true) => -i,
                (Pauli::Z, false) => Complex64::new(1.0, 0.0),
                (Pauli::Z, true) => Complex64::new(-1.0, 0.0),
            };
        }
        acc += amps[idx ^ flip].conj() * phase * a;
    }
    acc
}

/// Shot-free `⟨op⟩` from the final statevector of a measurement-free circuit.
pub fn exact_expectation(op: &PauliOperator, circuit: &Circuit, n_qubits: usize) -> Result<f64, HybridError> {
    check_hermitian(op)?;
    if circuit.has_measurement() {
        return Err(HybridError::AlreadyMeasured);
    }
    let state = StatevectorSimulator::new().statevector(circuit, n_qubits.max(op.num_qubits()).max(1))?;
    Ok(op.terms().map(|(s, c)| (c * pauli_expectation(&state, s)).re).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hybrid::{X, Y, Z};

    fn deuteron() -> PauliOperator {
        PauliOperator::identity(5.907) - 2.1433 * X(0) * X(1) - 2.1433 * Y(0) * Y(1) + 0.21829 * Z(0) - 6.125 * Z(1)
    }

    #[test]
    fn single_z_term() {
        let c = Circuit::from_instructions("c", [Instruction::h(1)]);
        let obs = observe(&Z(0), &c).unwrap();
        assert_eq!(obs.terms.len(), 1);
        assert_eq!(obs.terms[0].circuit.flatten(), vec![Instruction::h(1), Instruction::measure(0)]);
    }

    #[test]
    fn deuteron_terms_and_offset() {
        let obs = observe(&deuteron(), &Circuit::new("a")).unwrap();
        assert_eq!(obs.terms.len(), 4);
        assert!((obs.offset.re - 5.907).abs() < 1e-12);
        let yy = obs.terms.iter().find(|t| t.term.factors().iter().all(|f| f.1 == Pauli::Y)).unwrap();
        let kinds: Vec<GateKind> = yy.circuit.iter().map(|i| i.kind).collect();
        assert_eq!(kinds, vec![GateKind::Sdg, GateKind::H, GateKind::Sdg, GateKind::H, GateKind::Measure, GateKind::Measure]);
    }

    #[test]
    fn identity_only() {
        let obs = observe(&PauliOperator::identity(3.0), &Circuit::new("a")).unwrap();
        assert!(obs.terms.is_empty());
        assert_eq!(obs.offset, Complex64::new(3.0, 0.0));
    }

    #[test]
    fn rejects_measured_and_non_hermitian() {
        let c = Circuit::from_instructions("m", [Instruction::measure(0)]);
        assert_eq!(observe(&Z(0), &c), Err(HybridError::AlreadyMeasured));
        let op = Z(0).scale(Complex64::new(1.0, 0.5));
        let sim = StatevectorSimulator::new();
        assert!(matches!(
            expectation(&op, &Circuit::new("e"), 1, &sim, &ExecRequest::exact()),
            Err(HybridError::NonHermitianOperator { .. })
        ));
    }

    #[test]
    fn empty_kernel_z_is_one() {
        let sim = StatevectorSimulator::new();
        let e = expectation(&Z(0), &Circuit::new("e"), 1, &sim, &ExecRequest::sampled(100, 1)).unwrap();
        assert_eq!(e, 1.0);
    }

    #[test]
    fn exact_matches_dense_matrix() {
        let c = Circuit::from_instructions(
            "c",
            [Instruction::h(0), Instruction::rotation(GateKind::Ry, 1, 0.7), Instruction::cx(0, 1), Instruction::rz(1, 0.3)],
        );
        let h = deuteron();
        let state = StatevectorSimulator::new().statevector(&c, 2).unwrap();
        let m = h.to_matrix(2);
        // Independent route: ψ† M ψ with the operator's dense matrix.
        let psi = state.amplitudes();
        let mut dense = Complex64::new(0.0, 0.0);
        for r in 0..4 {
            for col in 0..4 {
                dense += psi[r].conj() * m[(r, col)] * psi[col];
            }
        }
        assert!((exact_expectation(&h, &c, 2).unwrap() - dense.re).abs() < 1e-10);
        let sampled = expectation(&h, &c, 2, &StatevectorSimulator::new(), &ExecRequest::exact()).unwrap();
        assert!((sampled - dense.re).abs() < 1e-10);
    }
}

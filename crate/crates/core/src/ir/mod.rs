//! Circuit intermediate representation.
//!
//! A [`Circuit`] is an ordered tree of [`Instruction`]s and nested sub-circuits; it is the
//! compiled form of a quantum kernel. Everything downstream (passes, placement, backends)
//! works on its flattened instruction list.

mod decompose;
mod gate;
mod matrix;
mod transform;
mod unitary;

use std::collections::BTreeMap;
use std::fmt;
use std::io;

use serde::Serialize;
use thiserror::Error;

pub use decompose::{
    controlled_single_qubit, multi_controlled, sqrt_unitary_2x2, toffoli, zyz_angles, ZyzAngles,
};
pub use gate::GateKind;
pub use matrix::{Matrix, UnitaryMatrix};
pub use transform::{adjoint, controlled};
pub use unitary::{apply_matrix, to_unitary, MAX_UNITARY_QUBITS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IrError {
    #[error("{kind} expects {expected} qubit(s), got {got}")]
    Arity { kind: GateKind, expected: usize, got: usize },
    #[error("{kind} expects {expected} parameter(s), got {got}")]
    ParamCount { kind: GateKind, expected: usize, got: usize },
    #[error("{kind} applied to repeated qubit q{qubit}")]
    RepeatedQubit { kind: GateKind, qubit: usize },
    #[error("cannot take the adjoint of a circuit containing {0}")]
    AdjointOfNonUnitary(GateKind),
    #[error("cannot control a circuit containing {0}")]
    ControlOfNonUnitary(GateKind),
    #[error("control qubit q{0} is already used by the circuit")]
    ControlQubitInUse(usize),
    #[error("unitary reconstruction supports at most {max} qubits, got {got}")]
    TooManyQubits { max: usize, got: usize },
    #[error("instruction {0} has no unitary matrix")]
    NonUnitaryInstruction(GateKind),
    #[error("qubit q{qubit} out of range for {n_qubits} qubit(s)")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },
}

/// A single primitive operation.
#[derive(Debug, Clone, PartialEq)]
pub struct Instruction {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    pub params: Vec<f64>,
    /// Classical result slot; only meaningful for `Measure`.
    pub clbit: Option<usize>,
}

impl Instruction {
    pub fn new(kind: GateKind, qubits: Vec<usize>, params: Vec<f64>) -> Result<Self, IrError> {
        if qubits.len() != kind.arity() {
            return Err(IrError::Arity { kind, expected: kind.arity(), got: qubits.len() });
        }
        if params.len() != kind.param_count() {
            return Err(IrError::ParamCount {
                kind,
                expected: kind.param_count(),
                got: params.len(),
            });
        }
        if qubits.len() == 2 && qubits[0] == qubits[1] {
            return Err(IrError::RepeatedQubit { kind, qubit: qubits[0] });
        }
        let clbit = (kind == GateKind::Measure).then(|| qubits[0]);
        Ok(Self { kind, qubits, params, clbit })
    }

    fn raw(kind: GateKind, qubits: Vec<usize>, params: Vec<f64>) -> Self {
        debug_assert_eq!(qubits.len(), kind.arity());
        debug_assert_eq!(params.len(), kind.param_count());
        Self { kind, qubits, params, clbit: None }
    }

    pub fn one(kind: GateKind, qubit: usize) -> Self {
        Self::raw(kind, vec![qubit], vec![])
    }

    pub fn rotation(kind: GateKind, qubit: usize, angle: f64) -> Self {
        Self::raw(kind, vec![qubit], vec![angle])
    }

    pub fn two(kind: GateKind, a: usize, b: usize) -> Self {
        assert_ne!(a, b, "{kind} on repeated qubit");
        Self::raw(kind, vec![a, b], vec![])
    }

    pub fn h(q: usize) -> Self {
        Self::one(GateKind::H, q)
    }

    pub fn x(q: usize) -> Self {
        Self::one(GateKind::X, q)
    }

    pub fn rz(q: usize, angle: f64) -> Self {
        Self::rotation(GateKind::Rz, q, angle)
    }

    pub fn u3(q: usize, theta: f64, phi: f64, lambda: f64) -> Self {
        Self::raw(GateKind::U3, vec![q], vec![theta, phi, lambda])
    }

    pub fn cx(control: usize, target: usize) -> Self {
        Self::two(GateKind::CX, control, target)
    }

    pub fn cphase(control: usize, target: usize, angle: f64) -> Self {
        assert_ne!(control, target);
        Self::raw(GateKind::CPhase, vec![control, target], vec![angle])
    }

    pub fn crz(control: usize, target: usize, angle: f64) -> Self {
        assert_ne!(control, target);
        Self::raw(GateKind::CRz, vec![control, target], vec![angle])
    }

    pub fn swap(a: usize, b: usize) -> Self {
        Self::two(GateKind::Swap, a, b)
    }

    /// Measurement of `qubit` into classical slot `qubit`.
    pub fn measure(qubit: usize) -> Self {
        Self::measure_into(qubit, qubit)
    }

    pub fn measure_into(qubit: usize, clbit: usize) -> Self {
        Self { kind: GateKind::Measure, qubits: vec![qubit], params: vec![], clbit: Some(clbit) }
    }

    pub fn reset(qubit: usize) -> Self {
        Self::one(GateKind::Reset, qubit)
    }

    pub fn matrix(&self) -> Option<Matrix> {
        self.kind.matrix(&self.params)
    }

    pub fn is_unitary(&self) -> bool {
        self.kind.is_unitary()
    }

    pub fn touches(&self, qubit: usize) -> bool {
        self.qubits.contains(&qubit)
    }

    /// The inverse instruction. Measure and Reset have none.
    pub fn inverse(&self) -> Result<Instruction, IrError> {
        use GateKind::*;
        let mut inv = self.clone();
        match self.kind {
            H | X | Y | Z | CX | CY | CZ | CH | Swap => {}
            S => inv.kind = Sdg,
            Sdg => inv.kind = S,
            T => inv.kind = Tdg,
            Tdg => inv.kind = T,
            Rx | Ry | Rz | U1 | CPhase | CRz => inv.params[0] = -self.params[0],
            U3 => inv.params = vec![-self.params[0], -self.params[2], -self.params[1]],
            Measure | Reset => return Err(IrError::AdjointOfNonUnitary(self.kind)),
        }
        Ok(inv)
    }

    /// Rewrites qubit indices through `f`. Classical slots are left untouched.
    pub fn map_qubits(&self, f: impl Fn(usize) -> usize) -> Instruction {
        let mut out = self.clone();
        for q in &mut out.qubits {
            *q = f(*q);
        }
        out
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.kind.name())?;
        if !self.params.is_empty() {
            let params: Vec<String> = self.params.iter().map(|p| p.to_string()).collect();
            write!(f, "({})", params.join(","))?;
        }
        let qubits: Vec<String> = self.qubits.iter().map(|q| format!("q{q}")).collect();
        write!(f, " {}", qubits.join(","))?;
        if let Some(c) = self.clbit {
            if self.kind == GateKind::Measure && c != self.qubits[0] {
                write!(f, " -> c{c}")?;
            }
        }
        Ok(())
    }
}

/// A child of a [`Circuit`].
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Inst(Instruction),
    Sub(Circuit),
}

/// Ordered tree of instructions and sub-circuits.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Circuit {
    pub name: String,
    pub children: Vec<Node>,
}

impl Circuit {
    pub fn new(name: impl Into<String>) -> Self {
        Self { name: name.into(), children: Vec::new() }
    }

    pub fn from_instructions(
        name: impl Into<String>,
        instructions: impl IntoIterator<Item = Instruction>,
    ) -> Self {
        Self {
            name: name.into(),
            children: instructions.into_iter().map(Node::Inst).collect(),
        }
    }

    pub fn push(&mut self, inst: Instruction) {
        self.children.push(Node::Inst(inst));
    }

    pub fn push_circuit(&mut self, sub: Circuit) {
        self.children.push(Node::Sub(sub));
    }

    pub fn extend(&mut self, instructions: impl IntoIterator<Item = Instruction>) {
        self.children.extend(instructions.into_iter().map(Node::Inst));
    }

    /// Depth-first, left-to-right walk over leaf instructions.
    pub fn iter(&self) -> Instructions<'_> {
        Instructions { stack: vec![self.children.iter()] }
    }

    pub fn flatten(&self) -> Vec<Instruction> {
        self.iter().cloned().collect()
    }

    /// Copy of this circuit with the tree collapsed to a single level.
    pub fn flattened(&self) -> Circuit {
        Circuit::from_instructions(self.name.clone(), self.flatten())
    }

    /// Number of leaf instructions.
    pub fn len(&self) -> usize {
        self.iter().count()
    }

    pub fn is_empty(&self) -> bool {
        self.iter().next().is_none()
    }

    /// One past the largest qubit index referenced (0 for an empty circuit).
    pub fn num_qubits(&self) -> usize {
        self.iter().flat_map(|i| i.qubits.iter()).map(|&q| q + 1).max().unwrap_or(0)
    }

    pub fn first_non_unitary(&self) -> Option<GateKind> {
        self.iter().find(|i| !i.is_unitary()).map(|i| i.kind)
    }

    pub fn has_measurement(&self) -> bool {
        self.iter().any(|i| i.kind == GateKind::Measure)
    }

    pub fn stats(&self) -> CircuitStats {
        CircuitStats::of(self.iter())
    }

    /// Writes one instruction per line in the stable listing format.
    pub fn print(&self, sink: &mut dyn io::Write) -> io::Result<()> {
        for inst in self.iter() {
            writeln!(sink, "{inst}")?;
        }
        Ok(())
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for inst in self.iter() {
            writeln!(f, "{inst}")?;
        }
        Ok(())
    }
}

pub fn flatten(circuit: &Circuit) -> Vec<Instruction> {
    circuit.flatten()
}

pub fn stats(circuit: &Circuit) -> CircuitStats {
    circuit.stats()
}

pub fn print_circuit(circuit: &Circuit, sink: &mut dyn io::Write) -> io::Result<()> {
    circuit.print(sink)
}

pub struct Instructions<'a> {
    stack: Vec<std::slice::Iter<'a, Node>>,
}

impl<'a> Iterator for Instructions<'a> {
    type Item = &'a Instruction;

    fn next(&mut self) -> Option<&'a Instruction> {
        loop {
            let top = self.stack.last_mut()?;
            match top.next() {
                Some(Node::Inst(inst)) => return Some(inst),
                Some(Node::Sub(sub)) => self.stack.push(sub.children.iter()),
                None => {
                    self.stack.pop();
                }
            }
        }
    }
}

/// Gate-count summary of a circuit, computed on its flattened form.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct CircuitStats {
    pub total_gates: usize,
    pub histogram: BTreeMap<GateKind, usize>,
    pub two_qubit_count: usize,
    /// Longest chain of instructions linked by shared qubits.
    pub depth: usize,
}

impl CircuitStats {
    pub fn of<'a>(instructions: impl IntoIterator<Item = &'a Instruction>) -> Self {
        let mut stats = CircuitStats::default();
        let mut level: Vec<usize> = Vec::new();
        for inst in instructions {
            stats.total_gates += 1;
            *stats.histogram.entry(inst.kind).or_default() += 1;
            if inst.qubits.len() == 2 {
                stats.two_qubit_count += 1;
            }
            let top = inst.qubits.iter().copied().max().unwrap_or(0);
            if level.len() <= top {
                level.resize(top + 1, 0);
            }
            let l = inst.qubits.iter().map(|&q| level[q]).max().unwrap_or(0) + 1;
            for &q in &inst.qubits {
                level[q] = l;
            }
            stats.depth = stats.depth.max(l);
        }
        stats
    }
}

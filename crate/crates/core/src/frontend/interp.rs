//! Kernel instantiation: interprets the restricted classical AST, emitting instructions into
//! a circuit (NISQ) or straight into a live backend session (FTQC).

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use super::ast::*;
use super::registry::KernelRegistry;
use super::synthesis::{decompose_unitary, UNITARITY_TOL};
use super::{stdlib, FrontendError, Pos};
use crate::backend::{ExecutionMode, Session};
use crate::hybrid::{exp_i_theta, PauliOperator};
use crate::ir::{adjoint, controlled, controlled_single_qubit, toffoli, Circuit, GateKind, Instruction, Matrix};

const MAX_CALL_DEPTH: usize = 64;
const MAX_LOOP_ITERATIONS: usize = 1_000_000;

/// Argument supplied to an entry kernel. A register is given by its size.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelArg {
    Qreg(usize),
    Real(f64),
    Int(i64),
    RealVec(Vec<f64>),
    IntVec(Vec<i64>),
}

/// Result of a streamed (FTQC) instantiation.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StreamOutcome {
    /// Every instruction dispatched, in order.
    pub trace: Circuit,
    /// `(qubit, bit)` for every measurement, in order.
    pub measurements: Vec<(usize, bool)>,
}

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Int(i64),
    Real(f64),
    Bool(bool),
    /// A measurement result not known until the circuit runs.
    Unknown,
    Qreg { offset: usize, size: usize },
    Qubit(usize),
    Creg { offset: usize, size: usize },
    Clbit(usize),
    RealVec(Vec<f64>),
    IntVec(Vec<i64>),
    Op(PauliOperator),
}

impl Value {
    fn type_name(&self) -> &'static str {
        match self {
            Value::Int(_) => "int",
            Value::Real(_) => "double",
            Value::Bool(_) => "bool",
            Value::Unknown => "measurement result",
            Value::Qreg { .. } => "qreg",
            Value::Qubit(_) => "qubit",
            Value::Creg { .. } => "creg",
            Value::Clbit(_) => "clbit",
            Value::RealVec(_) => "std::vector<double>",
            Value::IntVec(_) => "std::vector<int>",
            Value::Op(_) => "operator",
        }
    }
}

/// Instantiates `def` with `args`.
///
/// In NISQ mode the kernel's circuit is returned and, when `parent` is given, also appended to
/// it as a sub-circuit. In FTQC mode every instruction is applied to `measure_source` as it is
/// produced, measurement results drive control flow, and the returned circuit is the trace.
pub fn instantiate(
    registry: &KernelRegistry,
    def: &KernelDef,
    args: &[KernelArg],
    parent: Option<&mut Circuit>,
    mode: ExecutionMode,
    measure_source: Option<&mut dyn Session>,
) -> Result<Circuit, FrontendError> {
    let values = entry_values(def, args)?;
    let session = match mode {
        ExecutionMode::Nisq => None,
        ExecutionMode::Ftqc => Some(measure_source.ok_or(crate::backend::BackendError::NoActiveSession)?),
    };
    let mut interp = Interp { registry, session, measurements: Vec::new(), depth: 0 };
    let circuit = interp.kernel(def, values, &def.languages.first().map_or_else(|| Pos::new("<kernel>", 1, 1), |l| l.1.clone()))?;
    if let Some(parent) = parent {
        parent.push_circuit(circuit.clone());
    }
    Ok(circuit)
}

/// Streams `def` into `session`, returning the dispatched trace and measurement results.
pub(crate) fn stream(
    registry: &KernelRegistry,
    def: &KernelDef,
    args: &[KernelArg],
    session: &mut dyn Session,
) -> Result<StreamOutcome, FrontendError> {
    let values = entry_values(def, args)?;
    let mut interp = Interp { registry, session: Some(session), measurements: Vec::new(), depth: 0 };
    let pos = def.languages.first().map_or_else(|| Pos::new("<kernel>", 1, 1), |l| l.1.clone());
    let trace = interp.kernel(def, values, &pos)?;
    Ok(StreamOutcome { trace, measurements: interp.measurements })
}

fn entry_values(def: &KernelDef, args: &[KernelArg]) -> Result<Vec<Value>, FrontendError> {
    let sig = &def.signature;
    if args.len() != sig.params.len() {
        return Err(FrontendError::ArgumentMismatch {
            kernel: sig.name.clone(),
            message: format!("expected {} argument(s) for {sig}, got {}", sig.params.len(), args.len()),
        });
    }
    sig.params
        .iter()
        .zip(args)
        .map(|(p, a)| match (p.ty, a) {
            (ParamType::Qreg, KernelArg::Qreg(n)) if *n > 0 => Ok(Value::Qreg { offset: 0, size: *n }),
            (ParamType::Real, KernelArg::Real(x)) => Ok(Value::Real(*x)),
            (ParamType::Real, KernelArg::Int(i)) => Ok(Value::Real(*i as f64)),
            (ParamType::Int, KernelArg::Int(i)) => Ok(Value::Int(*i)),
            (ParamType::RealVector, KernelArg::RealVec(v)) => Ok(Value::RealVec(v.clone())),
            (ParamType::RealVector, KernelArg::IntVec(v)) => Ok(Value::RealVec(v.iter().map(|&i| i as f64).collect())),
            (ParamType::IntVector, KernelArg::IntVec(v)) => Ok(Value::IntVec(v.clone())),
            _ => Err(FrontendError::ArgumentMismatch {
                kernel: sig.name.clone(),
                message: format!("parameter '{}' of type {} cannot take {a:?}", p.name, p.ty),
            }),
        })
        .collect()
}

/// Per-kernel-invocation state.
struct Frame {
    scopes: Vec<HashMap<String, Value>>,
    /// First register parameter; bare integers used as qubits index into it.
    primary: (usize, usize),
    next_alias: usize,
    next_clbit: usize,
}

impl Frame {
    fn lookup(&self, name: &str) -> Option<&Value> {
        self.scopes.iter().rev().find_map(|s| s.get(name))
    }

    fn lookup_mut(&mut self, name: &str) -> Option<&mut Value> {
        self.scopes.iter_mut().rev().find_map(|s| s.get_mut(name))
    }

    fn bind(&mut self, name: &str, value: Value) {
        self.scopes.last_mut().expect("frame has a scope").insert(name.to_string(), value);
    }
}

enum Qubits {
    One(usize),
    Many(Vec<usize>),
}

struct Interp<'r, 's> {
    registry: &'r KernelRegistry,
    session: Option<&'s mut dyn Session>,
    measurements: Vec<(usize, bool)>,
    depth: usize,
}

fn eval_err(pos: &Pos, message: impl Into<String>) -> FrontendError {
    FrontendError::Eval { pos: pos.clone(), message: message.into() }
}

fn expr_pos<'e>(e: &'e Expr, fallback: &'e Pos) -> &'e Pos {
    match e {
        Expr::Var(_, p) | Expr::Index(_, _, p) | Expr::Size(_, p) | Expr::Unary(_, _, p) | Expr::Binary(_, _, _, p) | Expr::Call(_, _, p) => p,
        _ => fallback,
    }
}

impl Interp<'_, '_> {
    fn kernel(&mut self, def: &KernelDef, args: Vec<Value>, pos: &Pos) -> Result<Circuit, FrontendError> {
        if self.depth >= MAX_CALL_DEPTH {
            return Err(FrontendError::RecursionLimit { pos: pos.clone(), limit: MAX_CALL_DEPTH });
        }
        let mut scope = HashMap::new();
        let mut primary = None;
        for (p, v) in def.signature.params.iter().zip(args) {
            if let (None, Value::Qreg { offset, size }) = (primary, &v) {
                primary = Some((*offset, *size));
            }
            scope.insert(p.name.clone(), v);
        }
        let primary = primary.ok_or_else(|| FrontendError::ArgumentMismatch {
            kernel: def.name().to_string(),
            message: "no register argument".into(),
        })?;
        let mut frame = Frame { scopes: vec![scope], primary, next_alias: primary.0, next_clbit: 0 };
        let mut out = Circuit::new(def.name());
        self.depth += 1;
        let result = self.block(&def.body, &mut frame, &mut out);
        self.depth -= 1;
        result.map(|()| out)
    }

    fn block(&mut self, stmts: &[Stmt], frame: &mut Frame, out: &mut Circuit) -> Result<(), FrontendError> {
        for s in stmts {
            self.stmt(s, frame, out)?;
        }
        Ok(())
    }

    fn scoped(&mut self, stmts: &[Stmt], frame: &mut Frame, out: &mut Circuit) -> Result<(), FrontendError> {
        frame.scopes.push(HashMap::new());
        let r = self.block(stmts, frame, out);
        frame.scopes.pop();
        r
    }

    /// Emits one instruction: recorded in `out` and, when streaming, applied immediately.
    fn emit(&mut self, inst: Instruction, out: &mut Circuit) -> Result<Option<bool>, FrontendError> {
        let bit = match self.session.as_deref_mut() {
            Some(s) => s.apply(&inst)?,
            None => None,
        };
        if let Some(b) = bit {
            self.measurements.push((inst.qubits[0], b));
        }
        out.push(inst);
        Ok(bit)
    }

    /// Emits an already-built sub-circuit.
    fn emit_circuit(&mut self, sub: Circuit, out: &mut Circuit) -> Result<(), FrontendError> {
        if let Some(s) = self.session.as_deref_mut() {
            for inst in sub.iter() {
                if let Some(b) = s.apply(inst)? {
                    self.measurements.push((inst.qubits[0], b));
                }
            }
        }
        out.push_circuit(sub);
        Ok(())
    }

    /// Runs `f` with streaming suspended, so everything it emits is only recorded.
    fn detached<T>(&mut self, f: impl FnOnce(&mut Self) -> Result<T, FrontendError>) -> Result<T, FrontendError> {
        let session = self.session.take();
        let r = f(self);
        self.session = session;
        r
    }

    fn stmt(&mut self, stmt: &Stmt, frame: &mut Frame, out: &mut Circuit) -> Result<(), FrontendError> {
        match stmt {
            Stmt::Gate { gate, qubits, params, clbit, pos } => self.gate(*gate, qubits, params, clbit.as_ref(), pos, frame, out),
            Stmt::KernelCall { name, mode, args, pos } => self.call(name, mode, args, pos, frame, out),
            Stmt::Block(body) => self.scoped(body, frame, out),
            Stmt::If { cond, then, otherwise, pos } => {
                if self.condition(cond, pos, frame)? {
                    self.scoped(then, frame, out)
                } else {
                    self.scoped(otherwise, frame, out)
                }
            }
            Stmt::For { init, cond, update, body, pos } => {
                frame.scopes.push(HashMap::new());
                let r = self.for_loop(init.as_deref(), cond.as_ref(), update.as_ref(), body, pos, frame, out);
                frame.scopes.pop();
                r
            }
            Stmt::ForEach { index, var, iterable, enumerate, body, pos } => {
                let items: Vec<Value> = match self.eval(iterable, pos, frame)? {
                    Value::IntVec(v) => v.into_iter().map(Value::Int).collect(),
                    Value::RealVec(v) => v.into_iter().map(Value::Real).collect(),
                    Value::Qreg { offset, size } => (offset..offset + size).map(Value::Qubit).collect(),
                    other => return Err(eval_err(pos, format!("cannot iterate over {}", other.type_name()))),
                };
                for (i, item) in items.into_iter().enumerate() {
                    frame.scopes.push(HashMap::new());
                    if *enumerate {
                        if let Some(ix) = index {
                            frame.bind(ix, Value::Int(i as i64));
                        }
                    }
                    frame.bind(var, item);
                    let r = self.block(body, frame, out);
                    frame.scopes.pop();
                    r?;
                }
                Ok(())
            }
            Stmt::Let { name, ty, value, pos } => {
                let v = self.eval(value, pos, frame)?;
                let v = convert(v, *ty, pos)?;
                frame.bind(name, v);
                Ok(())
            }
            Stmt::Assign { name, op, value, pos } => self.assign(name, *op, value, pos, frame),
            Stmt::LetBit { name, qubit, pos } => {
                let q = self.single_qubit(qubit, pos, frame)?;
                let bit = self.emit(Instruction::measure(q), out)?;
                frame.bind(name, bit.map_or(Value::Unknown, Value::Bool));
                Ok(())
            }
            Stmt::Decompose { size, init, entries, target, method, tolerance, pos } => {
                self.decompose(size, init, entries, target, method.as_deref(), *tolerance, pos, frame, out)
            }
            Stmt::ExpITheta { qreg, theta, op, pos } => {
                let (offset, size) = match self.eval(qreg, pos, frame)? {
                    Value::Qreg { offset, size } => (offset, size),
                    other => return Err(eval_err(pos, format!("exp_i_theta expects a qreg, got {}", other.type_name()))),
                };
                let theta = self.real(theta, pos, frame)?;
                let op = match self.eval(op, pos, frame)? {
                    Value::Op(op) => op,
                    other => return Err(eval_err(pos, format!("exp_i_theta expects an operator, got {}", other.type_name()))),
                };
                if op.num_qubits() > size {
                    return Err(FrontendError::RangeError(format!(
                        "{pos}: operator acts on {} qubit(s) but the register has {size}",
                        op.num_qubits()
                    )));
                }
                let c = exp_i_theta(theta, &op)?;
                let mut shifted = Circuit::new(c.name.clone());
                shifted.extend(c.iter().map(|i| i.map_qubits(|q| q + offset)));
                self.emit_circuit(shifted, out)
            }
            Stmt::QregAlias { name, size, pos } => {
                let n = self.count(size, pos, frame)?;
                let (base, len) = frame.primary;
                if frame.next_alias + n > base + len {
                    return Err(FrontendError::RangeError(format!(
                        "{pos}: qreg {name}[{n}] does not fit in a register of {len} qubit(s)"
                    )));
                }
                frame.bind(name, Value::Qreg { offset: frame.next_alias, size: n });
                frame.next_alias += n;
                Ok(())
            }
            Stmt::Creg { name, size, pos } => {
                let n = self.count(size, pos, frame)?;
                frame.bind(name, Value::Creg { offset: frame.next_clbit, size: n });
                frame.next_clbit += n;
                Ok(())
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn for_loop(
        &mut self,
        init: Option<&Stmt>,
        cond: Option<&Expr>,
        update: Option<&LoopUpdate>,
        body: &[Stmt],
        pos: &Pos,
        frame: &mut Frame,
        out: &mut Circuit,
    ) -> Result<(), FrontendError> {
        if let Some(init) = init {
            self.stmt(init, frame, out)?;
        }
        let mut iterations = 0usize;
        loop {
            if let Some(c) = cond {
                if !self.condition(c, pos, frame)? {
                    return Ok(());
                }
            }
            iterations += 1;
            if iterations > MAX_LOOP_ITERATIONS {
                return Err(eval_err(pos, format!("loop exceeded {MAX_LOOP_ITERATIONS} iterations")));
            }
            self.scoped(body, frame, out)?;
            match update {
                Some(LoopUpdate::Step(name, op, e)) => self.assign(name, Some(*op), e, pos, frame)?,
                Some(LoopUpdate::Assign(name, e)) => self.assign(name, None, e, pos, frame)?,
                None => {}
            }
        }
    }

    fn assign(&mut self, name: &str, op: Option<BinOp>, value: &Expr, pos: &Pos, frame: &mut Frame) -> Result<(), FrontendError> {
        let rhs = self.eval(value, pos, frame)?;
        let current = frame.lookup(name).cloned().ok_or_else(|| eval_err(pos, format!("assignment to undeclared '{name}'")))?;
        let new = match op {
            Some(op) => binary(op, current.clone(), rhs, pos)?,
            None => rhs,
        };
        let ty = match current {
            Value::Int(_) => DeclType::Int,
            Value::Real(_) => DeclType::Real,
            Value::Bool(_) => DeclType::Bool,
            _ => DeclType::Auto,
        };
        let new = convert(new, ty, pos)?;
        *frame.lookup_mut(name).expect("looked up above") = new;
        Ok(())
    }

    fn condition(&mut self, e: &Expr, pos: &Pos, frame: &mut Frame) -> Result<bool, FrontendError> {
        match self.eval(e, pos, frame)? {
            Value::Bool(b) => Ok(b),
            Value::Int(i) => Ok(i != 0),
            Value::Real(r) => Ok(r != 0.0),
            Value::Unknown => Err(FrontendError::MeasurementDependentBranchInNisqMode { pos: expr_pos(e, pos).clone() }),
            other => Err(eval_err(pos, format!("{} used as a condition", other.type_name()))),
        }
    }

    fn real(&mut self, e: &Expr, pos: &Pos, frame: &mut Frame) -> Result<f64, FrontendError> {
        match self.eval(e, pos, frame)? {
            Value::Real(r) => Ok(r),
            Value::Int(i) => Ok(i as f64),
            Value::Unknown => Err(FrontendError::MeasurementDependentBranchInNisqMode { pos: expr_pos(e, pos).clone() }),
            other => Err(eval_err(expr_pos(e, pos), format!("expected a number, got {}", other.type_name()))),
        }
    }

    fn int(&mut self, e: &Expr, pos: &Pos, frame: &mut Frame) -> Result<i64, FrontendError> {
        match self.eval(e, pos, frame)? {
            Value::Int(i) => Ok(i),
            Value::Bool(b) => Ok(i64::from(b)),
            Value::Unknown => Err(FrontendError::MeasurementDependentBranchInNisqMode { pos: expr_pos(e, pos).clone() }),
            other => Err(eval_err(expr_pos(e, pos), format!("expected an integer, got {}", other.type_name()))),
        }
    }

    fn count(&mut self, e: &Expr, pos: &Pos, frame: &mut Frame) -> Result<usize, FrontendError> {
        let n = self.int(e, pos, frame)?;
        usize::try_from(n).map_err(|_| eval_err(expr_pos(e, pos), format!("expected a non-negative integer, got {n}")))
    }

    fn qubits(&mut self, e: &Expr, pos: &Pos, frame: &mut Frame) -> Result<Qubits, FrontendError> {
        match self.eval(e, pos, frame)? {
            Value::Qubit(q) => Ok(Qubits::One(q)),
            Value::Qreg { offset, size } => Ok(Qubits::Many((offset..offset + size).collect())),
            Value::Int(i) => {
                let (base, size) = frame.primary;
                if i < 0 || i as usize >= size {
                    return Err(FrontendError::RangeError(format!("{}: qubit {i} out of range for register of size {size}", expr_pos(e, pos))));
                }
                Ok(Qubits::One(base + i as usize))
            }
            Value::Unknown => Err(FrontendError::MeasurementDependentBranchInNisqMode { pos: expr_pos(e, pos).clone() }),
            other => Err(eval_err(expr_pos(e, pos), format!("expected a qubit, got {}", other.type_name()))),
        }
    }

    fn single_qubit(&mut self, e: &Expr, pos: &Pos, frame: &mut Frame) -> Result<usize, FrontendError> {
        match self.qubits(e, pos, frame)? {
            Qubits::One(q) => Ok(q),
            Qubits::Many(v) if v.len() == 1 => Ok(v[0]),
            Qubits::Many(_) => Err(eval_err(expr_pos(e, pos), "expected a single qubit, got a register")),
        }
    }

    fn clbits(&mut self, e: &Expr, pos: &Pos, frame: &mut Frame) -> Result<Qubits, FrontendError> {
        match self.eval(e, pos, frame)? {
            Value::Clbit(c) => Ok(Qubits::One(c)),
            Value::Creg { offset, size } => Ok(Qubits::Many((offset..offset + size).collect())),
            Value::Int(i) if i >= 0 => Ok(Qubits::One(i as usize)),
            other => Err(eval_err(expr_pos(e, pos), format!("expected a classical bit, got {}", other.type_name()))),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn gate(
        &mut self,
        gate: GateRef,
        qubit_exprs: &[Expr],
        param_exprs: &[Expr],
        clbit: Option<&Expr>,
        pos: &Pos,
        frame: &mut Frame,
        out: &mut Circuit,
    ) -> Result<(), FrontendError> {
        let params = param_exprs.iter().map(|e| self.real(e, pos, frame)).collect::<Result<Vec<_>, _>>()?;
        let mut operands = qubit_exprs.iter().map(|e| self.qubits(e, pos, frame)).collect::<Result<Vec<_>, _>>()?;
        if let Some(c) = clbit {
            operands.push(self.clbits(c, pos, frame)?);
        }
        let width = operands.iter().find_map(|o| match o {
            Qubits::Many(v) => Some(v.len()),
            Qubits::One(_) => None,
        });
        if let Some(w) = width {
            if operands.iter().any(|o| matches!(o, Qubits::Many(v) if v.len() != w)) {
                return Err(eval_err(pos, "register operands of different sizes"));
            }
        }
        for k in 0..width.unwrap_or(1) {
            let mut qs: Vec<usize> = operands
                .iter()
                .map(|o| match o {
                    Qubits::One(q) => *q,
                    Qubits::Many(v) => v[k],
                })
                .collect();
            let cl = clbit.map(|_| qs.pop().expect("clbit operand pushed"));
            for inst in expand(gate, &qs, &params, pos)? {
                let inst = match cl {
                    Some(c) => Instruction { clbit: Some(c), ..inst },
                    None => inst,
                };
                self.emit(inst, out)?;
            }
        }
        Ok(())
    }

    fn call(&mut self, name: &str, mode: &CallMode, arg_exprs: &[Expr], pos: &Pos, frame: &mut Frame, out: &mut Circuit) -> Result<(), FrontendError> {
        let args = arg_exprs.iter().map(|e| self.eval(e, pos, frame)).collect::<Result<Vec<_>, _>>()?;
        let build = |this: &mut Self| -> Result<Circuit, FrontendError> {
            match this.registry.get(name) {
                Some(def) => {
                    let values = call_values(&def, args.clone(), pos)?;
                    this.kernel(&def, values, pos)
                }
                None if stdlib::STDLIB_KERNELS.contains(&name) => stdlib_call(name, &args, pos),
                None => Err(FrontendError::UnresolvedKernel { pos: pos.clone(), name: name.to_string() }),
            }
        };
        match mode {
            CallMode::Plain => {
                if self.registry.get(name).is_some() {
                    let sub = build(self)?;
                    out.push_circuit(sub);
                    Ok(())
                } else {
                    let sub = build(self)?;
                    self.emit_circuit(sub, out)
                }
            }
            CallMode::Adjoint => {
                let sub = self.detached(build)?;
                let adj = adjoint(&sub).map_err(|e| eval_err(pos, e.to_string()))?;
                self.emit_circuit(adj, out)
            }
            CallMode::Ctrl(control) => {
                let c = self.single_qubit(control, pos, frame)?;
                let sub = self.detached(build)?;
                let ctl = controlled(&sub, c).map_err(|e| eval_err(pos, e.to_string()))?;
                self.emit_circuit(ctl, out)
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn decompose(
        &mut self,
        size: &(Expr, Expr),
        init: &MatrixInit,
        entries: &[MatrixEntry],
        target: &Expr,
        method: Option<&str>,
        tolerance: Option<f64>,
        pos: &Pos,
        frame: &mut Frame,
        out: &mut Circuit,
    ) -> Result<(), FrontendError> {
        if let Some(m) = method {
            if !matches!(m, "givens" | "default") {
                return Err(FrontendError::UnknownSynthesisMethod { pos: pos.clone(), method: m.to_string() });
            }
        }
        let rows = self.count(&size.0, pos, frame)?;
        let cols = self.count(&size.1, pos, frame)?;
        if rows != cols || rows == 0 {
            return Err(eval_err(pos, format!("UnitaryMatrix must be square, got {rows}x{cols}")));
        }
        if rows > 1 << super::MAX_SYNTHESIS_QUBITS {
            return Err(FrontendError::TooManyQubitsForSynthesis { max: super::MAX_SYNTHESIS_QUBITS, got: rows.trailing_zeros() as usize });
        }
        let mut m = match init {
            MatrixInit::Identity => Matrix::identity(rows),
            MatrixInit::Zero => Matrix::zeros(rows),
        };
        for e in entries {
            let r = self.count(&e.row, pos, frame)?;
            let c = self.count(&e.col, pos, frame)?;
            if r >= rows || c >= cols {
                return Err(FrontendError::RangeError(format!("{pos}: entry ({r}, {c}) outside a {rows}x{cols} matrix")));
            }
            let re = self.real(&e.re, pos, frame)?;
            let im = self.real(&e.im, pos, frame)?;
            m[(r, c)] = Complex64::new(re, im);
        }
        let targets: Vec<usize> = match self.qubits(target, pos, frame)? {
            Qubits::One(q) => vec![q],
            Qubits::Many(v) => v,
        };
        // Matrix rows are indexed with the register's first qubit as the most significant bit.
        let reversed: Vec<usize> = targets.iter().rev().copied().collect();
        let c = decompose_unitary(&m, &reversed, tolerance.unwrap_or(UNITARITY_TOL))?;
        self.emit_circuit(c, out)
    }

    fn eval(&mut self, e: &Expr, pos: &Pos, frame: &mut Frame) -> Result<Value, FrontendError> {
        Ok(match e {
            Expr::Int(i) => Value::Int(*i),
            Expr::Real(r) => Value::Real(*r),
            Expr::Bool(b) => Value::Bool(*b),
            Expr::Var(name, p) => frame.lookup(name).cloned().ok_or_else(|| eval_err(p, format!("undeclared identifier '{name}'")))?,
            Expr::Index(base, idx, p) => {
                let base = self.eval(base, pos, frame)?;
                let i = self.int(idx, p, frame)?;
                let len = match &base {
                    Value::Qreg { size, .. } | Value::Creg { size, .. } => *size,
                    Value::RealVec(v) => v.len(),
                    Value::IntVec(v) => v.len(),
                    other => return Err(eval_err(p, format!("cannot index into {}", other.type_name()))),
                };
                if i < 0 || i as usize >= len {
                    return Err(FrontendError::RangeError(format!("{p}: index {i} out of range for length {len}")));
                }
                let i = i as usize;
                match base {
                    Value::Qreg { offset, .. } => Value::Qubit(offset + i),
                    Value::Creg { offset, .. } => Value::Clbit(offset + i),
                    Value::RealVec(v) => Value::Real(v[i]),
                    Value::IntVec(v) => Value::Int(v[i]),
                    _ => unreachable!(),
                }
            }
            Expr::Size(base, p) => match self.eval(base, pos, frame)? {
                Value::Qreg { size, .. } | Value::Creg { size, .. } => Value::Int(size as i64),
                Value::RealVec(v) => Value::Int(v.len() as i64),
                Value::IntVec(v) => Value::Int(v.len() as i64),
                other => return Err(eval_err(p, format!("{} has no size()", other.type_name()))),
            },
            Expr::Unary(op, inner, p) => {
                let v = self.eval(inner, pos, frame)?;
                match (op, v) {
                    (_, Value::Unknown) => Value::Unknown,
                    (UnOp::Neg, Value::Int(i)) => Value::Int(i.checked_neg().ok_or_else(|| eval_err(p, "integer overflow"))?),
                    (UnOp::Neg, Value::Real(r)) => Value::Real(-r),
                    (UnOp::Neg, Value::Op(o)) => Value::Op(-o),
                    (UnOp::Not, Value::Bool(b)) => Value::Bool(!b),
                    (UnOp::Not, Value::Int(i)) => Value::Bool(i == 0),
                    (op, v) => return Err(eval_err(p, format!("cannot apply {op:?} to {}", v.type_name()))),
                }
            }
            Expr::Binary(op, lhs, rhs, p) => {
                let l = self.eval(lhs, pos, frame)?;
                // Short-circuit as in C.
                match (op, &l) {
                    (BinOp::And, Value::Bool(false) | Value::Int(0)) => return Ok(Value::Bool(false)),
                    (BinOp::Or, Value::Bool(true)) => return Ok(Value::Bool(true)),
                    (BinOp::Or, Value::Int(i)) if *i != 0 => return Ok(Value::Bool(true)),
                    _ => {}
                }
                let r = self.eval(rhs, pos, frame)?;
                binary(*op, l, r, p)?
            }
            Expr::Call(name, args, p) => {
                let vals = args.iter().map(|a| self.eval(a, pos, frame)).collect::<Result<Vec<_>, _>>()?;
                call_function(name, vals, p)?
            }
        })
    }
}

fn convert(v: Value, ty: DeclType, pos: &Pos) -> Result<Value, FrontendError> {
    Ok(match (ty, v) {
        (_, Value::Unknown) => Value::Unknown,
        (DeclType::Auto, v) => v,
        (DeclType::Int, Value::Int(i)) => Value::Int(i),
        (DeclType::Int, Value::Real(r)) => Value::Int(r.trunc() as i64),
        (DeclType::Int, Value::Bool(b)) => Value::Int(i64::from(b)),
        (DeclType::Real, Value::Real(r)) => Value::Real(r),
        (DeclType::Real, Value::Int(i)) => Value::Real(i as f64),
        (DeclType::Real, Value::Bool(b)) => Value::Real(f64::from(u8::from(b))),
        (DeclType::Bool, Value::Bool(b)) => Value::Bool(b),
        (DeclType::Bool, Value::Int(i)) => Value::Bool(i != 0),
        (DeclType::Bool, Value::Real(r)) => Value::Bool(r != 0.0),
        (ty, v) => return Err(eval_err(pos, format!("cannot store {} in a {ty:?} variable", v.type_name()))),
    })
}

fn number(v: &Value) -> Option<f64> {
    match v {
        Value::Int(i) => Some(*i as f64),
        Value::Real(r) => Some(*r),
        Value::Bool(b) => Some(f64::from(u8::from(*b))),
        _ => None,
    }
}

fn int_of(v: &Value) -> Option<i64> {
    match v {
        Value::Int(i) => Some(*i),
        Value::Bool(b) => Some(i64::from(*b)),
        _ => None,
    }
}

fn binary(op: BinOp, l: Value, r: Value, pos: &Pos) -> Result<Value, FrontendError> {
    use BinOp::*;
    if matches!(l, Value::Unknown) || matches!(r, Value::Unknown) {
        return Ok(Value::Unknown);
    }
    let mismatch = |l: &Value, r: &Value| eval_err(pos, format!("cannot apply {op:?} to {} and {}", l.type_name(), r.type_name()));
    // Operator algebra.
    if matches!(l, Value::Op(_)) || matches!(r, Value::Op(_)) {
        let as_op = |v: &Value| match v {
            Value::Op(o) => Some(o.clone()),
            other => number(other).map(PauliOperator::identity),
        };
        let (Some(a), Some(b)) = (as_op(&l), as_op(&r)) else { return Err(mismatch(&l, &r)) };
        return Ok(Value::Op(match op {
            Add => &a + &b,
            Sub => &a - &b,
            Mul => match (&l, &r) {
                (Value::Op(_), Value::Op(_)) => &a * &b,
                (Value::Op(o), n) | (n, Value::Op(o)) => o.scale(Complex64::new(number(n).expect("numeric"), 0.0)),
                _ => unreachable!(),
            },
            Div => match (&l, &r) {
                (Value::Op(o), n) if number(n).is_some_and(|d| d != 0.0) => o.scale(Complex64::new(1.0 / number(n).expect("numeric"), 0.0)),
                _ => return Err(mismatch(&l, &r)),
            },
            _ => return Err(mismatch(&l, &r)),
        }));
    }
    match op {
        And | Or => {
            let truthy = |v: &Value| match v {
                Value::Bool(b) => Some(*b),
                other => number(other).map(|x| x != 0.0),
            };
            let (Some(a), Some(b)) = (truthy(&l), truthy(&r)) else { return Err(mismatch(&l, &r)) };
            return Ok(Value::Bool(if op == And { a && b } else { a || b }));
        }
        Eq | Ne | Lt | Le | Gt | Ge => {
            let ord = match (int_of(&l), int_of(&r)) {
                (Some(a), Some(b)) => a.partial_cmp(&b),
                _ => match (number(&l), number(&r)) {
                    (Some(a), Some(b)) => a.partial_cmp(&b),
                    _ => return Err(mismatch(&l, &r)),
                },
            };
            use std::cmp::Ordering::*;
            let v = match (op, ord) {
                (_, None) => op == Ne,
                (Eq, Some(o)) => o == Equal,
                (Ne, Some(o)) => o != Equal,
                (Lt, Some(o)) => o == Less,
                (Le, Some(o)) => o != Greater,
                (Gt, Some(o)) => o == Greater,
                (Ge, Some(o)) => o != Less,
                _ => unreachable!(),
            };
            return Ok(Value::Bool(v));
        }
        _ => {}
    }
    if let (Some(a), Some(b)) = (int_of(&l), int_of(&r)) {
        let overflow = || eval_err(pos, "integer overflow");
        return Ok(Value::Int(match op {
            Add => a.checked_add(b).ok_or_else(overflow)?,
            Sub => a.checked_sub(b).ok_or_else(overflow)?,
            Mul => a.checked_mul(b).ok_or_else(overflow)?,
            Div | Rem if b == 0 => return Err(eval_err(pos, "integer division by zero")),
            Div => a.checked_div(b).ok_or_else(overflow)?,
            Rem => a.checked_rem(b).ok_or_else(overflow)?,
            Shl | Shr if !(0..63).contains(&b) => return Err(eval_err(pos, format!("shift by {b}"))),
            Shl => a.checked_shl(b as u32).ok_or_else(overflow)?,
            Shr => a >> b,
            _ => unreachable!(),
        }));
    }
    let (Some(a), Some(b)) = (number(&l), number(&r)) else { return Err(mismatch(&l, &r)) };
    Ok(Value::Real(match op {
        Add => a + b,
        Sub => a - b,
        Mul => a * b,
        Div => a / b,
        Rem => a % b,
        _ => return Err(mismatch(&l, &r)),
    }))
}

fn call_function(name: &str, args: Vec<Value>, pos: &Pos) -> Result<Value, FrontendError> {
    if args.iter().any(|a| matches!(a, Value::Unknown)) {
        return Ok(Value::Unknown);
    }
    let nums: Option<Vec<f64>> = args.iter().map(number).collect();
    let arity = |n: usize| -> Result<(), FrontendError> {
        if args.len() == n {
            Ok(())
        } else {
            Err(eval_err(pos, format!("{name} takes {n} argument(s), got {}", args.len())))
        }
    };
    let unary: Option<fn(f64) -> f64> = match name {
        "sin" => Some(f64::sin),
        "cos" => Some(f64::cos),
        "tan" => Some(f64::tan),
        "asin" => Some(f64::asin),
        "acos" => Some(f64::acos),
        "atan" => Some(f64::atan),
        "sqrt" => Some(f64::sqrt),
        "exp" => Some(f64::exp),
        "log" => Some(f64::ln),
        "fabs" => Some(f64::abs),
        "floor" => Some(f64::floor),
        "ceil" => Some(f64::ceil),
        "round" => Some(f64::round),
        _ => None,
    };
    if let Some(f) = unary {
        arity(1)?;
        let x = nums.and_then(|v| v.first().copied()).ok_or_else(|| eval_err(pos, format!("{name} expects a number")))?;
        return Ok(Value::Real(f(x)));
    }
    match name {
        "abs" => {
            arity(1)?;
            match &args[0] {
                Value::Int(i) => Ok(Value::Int(i.abs())),
                v => number(v).map(|x| Value::Real(x.abs())).ok_or_else(|| eval_err(pos, "abs expects a number")),
            }
        }
        "pow" | "atan2" | "min" | "max" => {
            arity(2)?;
            if name != "pow" && name != "atan2" {
                if let (Some(a), Some(b)) = (int_of(&args[0]), int_of(&args[1])) {
                    return Ok(Value::Int(if name == "min" { a.min(b) } else { a.max(b) }));
                }
            }
            let v = nums.ok_or_else(|| eval_err(pos, format!("{name} expects numbers")))?;
            Ok(Value::Real(match name {
                "pow" => v[0].powf(v[1]),
                "atan2" => v[0].atan2(v[1]),
                "min" => v[0].min(v[1]),
                _ => v[0].max(v[1]),
            }))
        }
        "X" | "Y" | "Z" => {
            arity(1)?;
            let q = int_of(&args[0])
                .and_then(|i| usize::try_from(i).ok())
                .ok_or_else(|| eval_err(pos, format!("{name}(...) expects a qubit index")))?;
            Ok(Value::Op(match name {
                "X" => PauliOperator::x(q),
                "Y" => PauliOperator::y(q),
                _ => PauliOperator::z(q),
            }))
        }
        "range" => {
            let ints: Option<Vec<i64>> = args.iter().map(int_of).collect();
            match ints.as_deref() {
                Some([n]) => Ok(Value::IntVec((0..*n).collect())),
                Some([a, b]) => Ok(Value::IntVec((*a..*b).collect())),
                _ => Err(eval_err(pos, "range expects one or two integers")),
            }
        }
        "linspace" => {
            arity(3)?;
            let v = nums.ok_or_else(|| eval_err(pos, "linspace expects numbers"))?;
            let n = int_of(&args[2]).filter(|&n| n >= 0).ok_or_else(|| eval_err(pos, "linspace count must be a non-negative integer"))? as usize;
            Ok(Value::RealVec(match n {
                0 => Vec::new(),
                1 => vec![v[0]],
                _ => (0..n).map(|k| v[0] + (v[1] - v[0]) * k as f64 / (n - 1) as f64).collect(),
            }))
        }
        _ => Err(eval_err(pos, format!("unknown function '{name}'"))),
    }
}

/// Maps call-site values onto a sub-kernel's parameters.
fn call_values(def: &KernelDef, args: Vec<Value>, pos: &Pos) -> Result<Vec<Value>, FrontendError> {
    let sig = &def.signature;
    let mismatch = |message: String| FrontendError::ArgumentMismatch { kernel: sig.name.clone(), message: format!("{pos}: {message}") };
    if args.len() != sig.params.len() {
        return Err(mismatch(format!("expected {} argument(s) for {sig}, got {}", sig.params.len(), args.len())));
    }
    sig.params
        .iter()
        .zip(args)
        .map(|(p, v)| match (p.ty, v) {
            (ParamType::Qreg, v @ Value::Qreg { .. }) => Ok(v),
            (ParamType::Qreg, Value::Qubit(q)) => Ok(Value::Qreg { offset: q, size: 1 }),
            (ParamType::Real, Value::Real(r)) => Ok(Value::Real(r)),
            (ParamType::Real, Value::Int(i)) => Ok(Value::Real(i as f64)),
            (ParamType::Int, Value::Int(i)) => Ok(Value::Int(i)),
            (ParamType::Int, Value::Bool(b)) => Ok(Value::Int(i64::from(b))),
            (ParamType::RealVector, v @ Value::RealVec(_)) => Ok(v),
            (ParamType::RealVector, Value::IntVec(v)) => Ok(Value::RealVec(v.into_iter().map(|i| i as f64).collect())),
            (ParamType::IntVector, v @ Value::IntVec(_)) => Ok(v),
            (_, Value::Unknown) => Err(FrontendError::MeasurementDependentBranchInNisqMode { pos: pos.clone() }),
            (ty, v) => Err(mismatch(format!("parameter '{}' of type {ty} cannot take a {}", p.name, v.type_name()))),
        })
        .collect()
}

fn stdlib_call(name: &str, args: &[Value], pos: &Pos) -> Result<Circuit, FrontendError> {
    let (offset, size) = match args.first() {
        Some(Value::Qreg { offset, size }) => (*offset, *size),
        _ => {
            return Err(FrontendError::ArgumentMismatch {
                kernel: name.to_string(),
                message: format!("{pos}: first argument must be a qreg"),
            })
        }
    };
    let int_arg = |k: usize, default: i64| -> Result<i64, FrontendError> {
        match args.get(k) {
            None => Ok(default),
            Some(v) => int_of(v).ok_or_else(|| FrontendError::ArgumentMismatch {
                kernel: name.to_string(),
                message: format!("{pos}: argument {} must be an integer, got {}", k + 1, v.type_name()),
            }),
        }
    };
    if args.len() > 4 {
        return Err(FrontendError::ArgumentMismatch { kernel: name.to_string(), message: format!("{pos}: takes (q, start, n, swap)") });
    }
    let start = int_arg(1, 0)?;
    let n = int_arg(2, size as i64 - start)?;
    let swap = int_arg(3, 1)? != 0;
    if start < 0 || n < 0 || start as usize + n as usize > size {
        return Err(FrontendError::RangeError(format!(
            "{pos}: {name} on qubits [{start}, {}) outside a register of {size}",
            start + n
        )));
    }
    let (start, n) = (offset + start as usize, n as usize);
    Ok(if name == "qft" { stdlib::qft(start, n, swap) } else { stdlib::iqft(start, n, swap) })
}

/// Lowers a gate spelling to primitive instructions.
fn expand(gate: GateRef, qs: &[usize], params: &[f64], pos: &Pos) -> Result<Vec<Instruction>, FrontendError> {
    let distinct = (0..qs.len()).all(|i| (i + 1..qs.len()).all(|j| qs[i] != qs[j]));
    if !distinct {
        return Err(eval_err(pos, format!("{gate:?} applied to repeated qubits {qs:?}")));
    }
    Ok(match gate {
        GateRef::Kind(kind) => {
            let mut inst = Instruction::new(kind, qs.to_vec(), params.to_vec()).map_err(|e| eval_err(pos, e.to_string()))?;
            if kind != GateKind::Measure {
                inst.clbit = None;
            }
            vec![inst]
        }
        GateRef::Id => Vec::new(),
        GateRef::Ccx => toffoli(qs[0], qs[1], qs[2]),
        GateRef::Cswap => {
            let mut v = vec![Instruction::cx(qs[2], qs[1])];
            v.extend(toffoli(qs[0], qs[1], qs[2]));
            v.push(Instruction::cx(qs[2], qs[1]));
            v
        }
        GateRef::Rzz => vec![Instruction::cx(qs[0], qs[1]), Instruction::rz(qs[1], params[0]), Instruction::cx(qs[0], qs[1])],
        GateRef::U2 => vec![Instruction::u3(qs[0], PI / 2.0, params[0], params[1])],
        GateRef::Cu3 => {
            let u = GateKind::U3.matrix(params).expect("U3 is unitary");
            controlled_single_qubit(&u, qs[0], qs[1])
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::{Backend, StatevectorSimulator};
    use crate::ir::{to_unitary, Matrix};

    fn compile(src: &str) -> KernelRegistry {
        let r = KernelRegistry::new();
        r.jit_compile(src).unwrap();
        r
    }

    fn flat(r: &KernelRegistry, name: &str, args: &[KernelArg]) -> Vec<Instruction> {
        r.instantiate(name, args).unwrap().flatten()
    }

    const BELL: &str = "__qpu__ void bell(qreg q) {\n H(q[0]);\n CX(q[0], q[1]);\n for (int i = 0; i < q.size(); i++) {\n Measure(q[i]);\n }\n}";

    #[test]
    fn bell_flattens() {
        let r = compile(BELL);
        assert_eq!(
            flat(&r, "bell", &[KernelArg::Qreg(2)]),
            vec![Instruction::h(0), Instruction::cx(0, 1), Instruction::measure(0), Instruction::measure(1)]
        );
    }

    #[test]
    fn composition_is_transparent() {
        let r = compile(BELL);
        let def = r.get("bell").unwrap();
        let fresh = instantiate(&r, &def, &[KernelArg::Qreg(2)], None, ExecutionMode::Nisq, None).unwrap();
        let mut parent = Circuit::from_instructions("p", [Instruction::x(1)]);
        instantiate(&r, &def, &[KernelArg::Qreg(2)], Some(&mut parent), ExecutionMode::Nisq, None).unwrap();
        let mut expect = vec![Instruction::x(1)];
        expect.extend(fresh.flatten());
        assert_eq!(parent.flatten(), expect);
    }

    #[test]
    fn empty_loop_leaves_parent() {
        let r = compile("__qpu__ void k(qreg q, int n) { for (int i = 0; i < n; ++i) { H(q[i]); } }");
        assert!(flat(&r, "k", &[KernelArg::Qreg(2), KernelArg::Int(0)]).is_empty());
        assert_eq!(flat(&r, "k", &[KernelArg::Qreg(2), KernelArg::Int(2)]).len(), 2);
    }

    #[test]
    fn loops_and_arithmetic() {
        let src = "__qpu__ void k(qreg q, std::vector<double> p) {\n\
                   for (int i = q.size() - 1; i >= 0; i -= 2) { Rz(q[i], p[0] * 2); }\n\
                   for (auto [i, x] : enumerate(p)) { Ry(q[i], x / 2.0); }\n\
                   for (auto j : range(1, 3)) { X(q[j]); }\n\
                   double a = pi; a += 1; int b = 7 / 2; Rx(q[b], a);\n}";
        let r = compile(src);
        let f = flat(&r, "k", &[KernelArg::Qreg(4), KernelArg::RealVec(vec![0.5, 1.0])]);
        let names: Vec<_> = f.iter().map(|i| (i.kind, i.qubits[0])).collect();
        assert_eq!(
            names,
            vec![
                (GateKind::Rz, 3),
                (GateKind::Rz, 1),
                (GateKind::Ry, 0),
                (GateKind::Ry, 1),
                (GateKind::X, 1),
                (GateKind::X, 2),
                (GateKind::Rx, 3)
            ]
        );
        assert!((f[6].params[0] - (PI + 1.0)).abs() < 1e-15);
        assert_eq!(f[3].params[0], 0.5);
    }

    #[test]
    fn calls_resolve_and_check() {
        let r = compile("__qpu__ void a(qreg q) { H(q[0]); }\n__qpu__ void b(qreg q) { a(q); missing(q); }");
        assert!(matches!(r.instantiate("b", &[KernelArg::Qreg(1)]), Err(FrontendError::UnresolvedKernel { .. })));
        assert!(matches!(r.instantiate("a", &[KernelArg::Real(1.0)]), Err(FrontendError::ArgumentMismatch { .. })));
        assert!(matches!(r.instantiate("a", &[]), Err(FrontendError::ArgumentMismatch { .. })));
    }

    #[test]
    fn measurement_branch_rejected_in_nisq() {
        let r = compile("__qpu__ void k(qreg q) { const bool b = Measure(q[0]); if (b) { X(q[1]); } }");
        assert!(matches!(
            r.instantiate("k", &[KernelArg::Qreg(2)]),
            Err(FrontendError::MeasurementDependentBranchInNisqMode { .. })
        ));
        let r = compile("__qpu__ void k(qreg q) { bool b = Measure(q[0]); for (int i = 0; i < b; i++) { X(q[1]); } }");
        assert!(matches!(
            r.instantiate("k", &[KernelArg::Qreg(2)]),
            Err(FrontendError::MeasurementDependentBranchInNisqMode { .. })
        ));
    }

    #[test]
    fn ftqc_branches_on_live_bits() {
        let r = compile("__qpu__ void k(qreg q) { X(q[0]); const bool b = Measure(q[0]); if (b) { X(q[1]); } Measure(q[1]); }");
        let def = r.get("k").unwrap();
        let sim = StatevectorSimulator::new();
        let mut session = sim.open_session(2, 3).unwrap();
        let out = stream(&r, &def, &[KernelArg::Qreg(2)], session.as_mut()).unwrap();
        assert_eq!(out.measurements, vec![(0, true), (1, true)]);
        assert_eq!(out.trace.len(), 4);
    }

    #[test]
    fn adjoint_and_ctrl_calls() {
        let r = compile(
            "__qpu__ void t(qreg q) { T(q[0]); }\n__qpu__ void k(qreg q) { t::ctrl(1, q); }\n\
             __qpu__ void u(qreg q) { Rx(q[0], 0.3); CX(q[0], q[1]); S(q[1]); }\n__qpu__ void w(qreg q) { u(q); u::adjoint(q); }",
        );
        let k = r.instantiate("k", &[KernelArg::Qreg(2)]).unwrap();
        assert_eq!(k.flatten(), vec![Instruction::cphase(1, 0, PI / 4.0)]);
        let w = r.instantiate("w", &[KernelArg::Qreg(2)]).unwrap();
        assert!(to_unitary(&w, 2).unwrap().is_identity_up_to_phase(1e-12));
    }

    #[test]
    fn qasm_registers_and_broadcast() {
        let src = "__qpu__ void k(qreg q) {\nusing qk::openqasm;\nqreg a[1]; qreg b[2]; creg c[2]; creg d[1];\nh b;\nmeasure b -> c;\nmeasure a[0] -> d[0];\n}";
        let f = flat(&compile(src), "k", &[KernelArg::Qreg(3)]);
        assert_eq!(
            f,
            vec![
                Instruction::h(1),
                Instruction::h(2),
                Instruction::measure_into(1, 0),
                Instruction::measure_into(2, 1),
                Instruction::measure_into(0, 2)
            ]
        );
        let src = "__qpu__ void k(qreg q) {\nusing qk::openqasm;\nqreg a[4];\n}";
        assert!(matches!(compile(src).instantiate("k", &[KernelArg::Qreg(3)]), Err(FrontendError::RangeError(_))));
    }

    #[test]
    fn stdlib_range_checked() {
        let r = compile("__qpu__ void k(qreg q) { iqft(q, 1, 3, 1); }");
        assert!(matches!(r.instantiate("k", &[KernelArg::Qreg(3)]), Err(FrontendError::RangeError(_))));
        assert_eq!(r.instantiate("k", &[KernelArg::Qreg(4)]).unwrap(), {
            let mut c = Circuit::new("k");
            c.push_circuit(stdlib::iqft(1, 3, true));
            c
        });
    }

    #[test]
    fn decompose_big_endian_rows() {
        let src = "__qpu__ void k(qreg q) {\n decompose {\n UnitaryMatrix m = UnitaryMatrix::Identity(4, 4);\n\
                   m(2, 2) = 0.0; m(3, 3) = 0.0; m(2, 3) = 1.0; m(3, 2) = 1.0;\n }(q);\n}";
        let c = compile(src).instantiate("k", &[KernelArg::Qreg(2)]).unwrap();
        // q0 is the row index's high bit, so this is CX with control q0.
        let cx = to_unitary(&Circuit::from_instructions("cx", [Instruction::cx(0, 1)]), 2).unwrap();
        assert!(to_unitary(&c, 2).unwrap().approx_eq_up_to_phase(&cx, 1e-8));
        let bad = src.replace("(q);", "(q, method=qfast);");
        assert!(matches!(compile(&bad).instantiate("k", &[KernelArg::Qreg(2)]), Err(FrontendError::UnknownSynthesisMethod { .. })));
    }

    #[test]
    fn exp_i_theta_statement() {
        let src = "__qpu__ void k(qreg q, double t) { auto h = X(0) * Y(1) - Y(0) * X(1); exp_i_theta(q, t, h); }";
        let c = compile(src).instantiate("k", &[KernelArg::Qreg(2), KernelArg::Real(0.0)]).unwrap();
        assert!(to_unitary(&c, 2).unwrap().approx_eq_up_to_phase(&Matrix::identity(4), 1e-12));
    }

    #[test]
    fn recursion_is_bounded() {
        let r = compile("__qpu__ void k(qreg q) { k(q); }");
        assert!(matches!(r.instantiate("k", &[KernelArg::Qreg(1)]), Err(FrontendError::RecursionLimit { .. })));
    }

    #[test]
    fn gate_errors_have_positions() {
        let r = compile("__qpu__ void k(qreg q) {\n  CX(q[0], q[0]);\n}");
        let e = r.instantiate("k", &[KernelArg::Qreg(2)]).unwrap_err();
        assert_eq!(e.pos().unwrap().line, 2);
        let r = compile("__qpu__ void k(qreg q) {\n  H(q[5]);\n}");
        assert!(matches!(r.instantiate("k", &[KernelArg::Qreg(2)]), Err(FrontendError::RangeError(_))));
    }
}

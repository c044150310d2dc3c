//! Quil subset: one gate or measurement per line, qubits addressed by index.

use super::ast::*;
use super::lexer::{Tok, Token};
use super::parser::Parser;
use super::FrontendError;
use crate::ir::GateKind;

const UNSUPPORTED: &[&str] = &[
    "DEFGATE", "DEFCIRCUIT", "DEFFRAME", "DEFWAVEFORM", "DEFCAL", "LABEL", "JUMP", "JUMP-WHEN", "JUMP-UNLESS", "HALT",
    "WAIT", "NOP", "PRAGMA", "DAGGER", "CONTROLLED", "FORKED", "MOVE", "EXCHANGE", "LOAD", "STORE", "ADD", "SUB",
    "MUL", "DIV", "NOT", "AND", "IOR", "XOR", "EQ", "GT", "GE", "LT", "LE", "CONVERT", "PULSE", "CAPTURE",
];

fn quil_gate(name: &str) -> Option<GateRef> {
    use GateKind::*;
    Some(GateRef::Kind(match name {
        "H" => H,
        "X" => X,
        "Y" => Y,
        "Z" => Z,
        "S" => S,
        "T" => T,
        "RX" => Rx,
        "RY" => Ry,
        "RZ" => Rz,
        "PHASE" => U1,
        "CNOT" => CX,
        "CZ" => CZ,
        "SWAP" => Swap,
        "CPHASE" => CPhase,
        "RESET" => Reset,
        "I" => return Some(GateRef::Id),
        "CCNOT" => return Some(GateRef::Ccx),
        "CSWAP" => return Some(GateRef::Cswap),
        _ => return None,
    }))
}

impl Parser<'_> {
    /// Parses every token on the current source line as one Quil instruction.
    pub(crate) fn quil_line(&mut self) -> Result<Vec<Stmt>, FrontendError> {
        let first = self.next()?;
        let pos = first.pos.clone();
        let line_of = |t: &Token| (t.pos.file.clone(), t.pos.line);
        let line = line_of(first);
        let mut rest = Vec::new();
        while let Some(t) = self.peek() {
            if line_of(t) != line || t.is_sym(";") {
                break;
            }
            rest.push(t);
            self.i += 1;
        }
        self.eat_sym(";");
        let Some(word) = first.ident() else {
            return Err(FrontendError::Syntax { pos, message: format!("expected Quil instruction, found {}", first.describe()) });
        };
        if word == "DECLARE" {
            return Ok(Vec::new());
        }
        if UNSUPPORTED.contains(&word) {
            return Err(FrontendError::UnsupportedQuilFeature { pos, feature: word.to_string() });
        }
        if word == "MEASURE" {
            let (qubit, tail) = match rest.split_first() {
                Some((t, tail)) => (quil_qubit(t)?, tail),
                None => return Err(FrontendError::Syntax { pos, message: "MEASURE needs a qubit".into() }),
            };
            let clbit = match tail {
                [] => None,
                [t] => Some(quil_qubit(t)?),
                [name, open, idx, close] if name.ident().is_some() && open.is_sym("[") && close.is_sym("]") => {
                    Some(quil_qubit(idx)?)
                }
                _ => return Err(FrontendError::Syntax { pos, message: "expected MEASURE q [ro[k]]".into() }),
            };
            return Ok(vec![Stmt::Gate { gate: GateRef::Kind(GateKind::Measure), qubits: vec![qubit], params: Vec::new(), clbit, pos }]);
        }
        let gate = quil_gate(word).ok_or_else(|| FrontendError::UnsupportedQuilFeature { pos: pos.clone(), feature: format!("gate '{word}'") })?;
        let mut params = Vec::new();
        let mut idx = 0;
        if rest.first().is_some_and(|t| t.is_sym("(")) {
            let close = rest.iter().position(|t| t.is_sym(")")).ok_or_else(|| FrontendError::Syntax { pos: pos.clone(), message: "unclosed parameter list".into() })?;
            let owned: Vec<Token> = rest[1..close].iter().map(|t| (*t).clone()).collect();
            let end = rest[close].pos.clone();
            let mut sub = Parser::new(&owned, end);
            while !sub.at_end() {
                params.push(sub.expr()?);
                if !sub.at_end() {
                    sub.expect_sym(",")?;
                }
            }
            idx = close + 1;
        }
        let qubits = rest[idx..].iter().map(|t| quil_qubit(t)).collect::<Result<Vec<_>, _>>()?;
        if qubits.len() != gate.arity() || params.len() != gate.param_count() {
            return Err(FrontendError::Syntax {
                pos,
                message: format!(
                    "{word} takes {} qubit(s) and {} parameter(s), got {} and {}",
                    gate.arity(),
                    gate.param_count(),
                    qubits.len(),
                    params.len()
                ),
            });
        }
        Ok(vec![Stmt::Gate { gate, qubits, params, clbit: None, pos }])
    }
}

fn quil_qubit(t: &Token) -> Result<Expr, FrontendError> {
    match t.tok {
        Tok::Int(i) if i >= 0 => Ok(Expr::Int(i)),
        _ => Err(FrontendError::Syntax { pos: t.pos.clone(), message: format!("expected qubit index, found {}", t.describe()) }),
    }
}

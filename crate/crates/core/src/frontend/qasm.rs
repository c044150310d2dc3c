//! OpenQASM 2 subset. Statements map onto the enclosing kernel's register.

use super::ast::*;
use super::lexer::Tok;
use super::parser::Parser;
use super::FrontendError;
use crate::ir::GateKind;

fn qasm_gate(name: &str) -> Option<GateRef> {
    use GateKind::*;
    Some(GateRef::Kind(match name {
        "h" => H,
        "x" => X,
        "y" => Y,
        "z" => Z,
        "s" => S,
        "sdg" => Sdg,
        "t" => T,
        "tdg" => Tdg,
        "rx" => Rx,
        "ry" => Ry,
        "rz" => Rz,
        "u1" | "p" => U1,
        "u3" | "u" | "U" => U3,
        "cx" | "CX" => CX,
        "cy" => CY,
        "cz" => CZ,
        "ch" => CH,
        "cu1" | "cp" => CPhase,
        "crz" => CRz,
        "swap" => Swap,
        "reset" => Reset,
        "id" | "u0" => return Some(GateRef::Id),
        "u2" => return Some(GateRef::U2),
        "ccx" => return Some(GateRef::Ccx),
        "cswap" => return Some(GateRef::Cswap),
        "rzz" => return Some(GateRef::Rzz),
        "cu3" => return Some(GateRef::Cu3),
        _ => return None,
    }))
}

impl Parser<'_> {
    /// One OpenQASM statement; declarations that carry no semantics yield nothing.
    pub(crate) fn qasm_statement(&mut self) -> Result<Vec<Stmt>, FrontendError> {
        let pos = self.pos();
        let t = self.next()?;
        if t.is_sym(";") {
            return Ok(Vec::new());
        }
        let Some(word) = t.ident() else {
            return Err(FrontendError::Syntax { pos, message: format!("expected OpenQASM statement, found {}", t.describe()) });
        };
        match word {
            "OPENQASM" => {
                self.skip_to_semicolon()?;
                Ok(Vec::new())
            }
            "include" => {
                let file = match self.next()?.tok.clone() {
                    Tok::Str(s) => s,
                    _ => return Err(FrontendError::Syntax { pos, message: "expected include file name".into() }),
                };
                self.expect_sym(";")?;
                if file == "qelib1.inc" {
                    Ok(Vec::new())
                } else {
                    Err(FrontendError::UnsupportedQasmFeature { pos, feature: format!("include \"{file}\"") })
                }
            }
            "qreg" | "creg" => {
                let name = self.expect_ident()?;
                self.expect_sym("[")?;
                let size = self.expr()?;
                self.expect_sym("]")?;
                self.expect_sym(";")?;
                Ok(vec![if word == "qreg" {
                    Stmt::QregAlias { name, size, pos }
                } else {
                    Stmt::Creg { name, size, pos }
                }])
            }
            "barrier" => {
                self.skip_to_semicolon()?;
                Ok(Vec::new())
            }
            "gate" | "opaque" | "if" => {
                Err(FrontendError::UnsupportedQasmFeature { pos, feature: format!("'{word}' statements") })
            }
            "measure" => {
                let qubit = self.qasm_operand()?;
                self.expect_sym("->")?;
                let bit = self.qasm_operand()?;
                self.expect_sym(";")?;
                Ok(vec![Stmt::Gate {
                    gate: GateRef::Kind(GateKind::Measure),
                    qubits: vec![qubit],
                    params: Vec::new(),
                    clbit: Some(bit),
                    pos,
                }])
            }
            _ => {
                let Some(gate) = qasm_gate(word) else {
                    return Err(FrontendError::UnsupportedQasmFeature { pos, feature: format!("unknown gate '{word}'") });
                };
                let word = word.to_string();
                let mut params = Vec::new();
                if self.eat_sym("(") && !self.eat_sym(")") {
                    loop {
                        params.push(self.expr()?);
                        if self.eat_sym(")") {
                            break;
                        }
                        self.expect_sym(",")?;
                    }
                }
                let mut qubits = vec![self.qasm_operand()?];
                while self.eat_sym(",") {
                    qubits.push(self.qasm_operand()?);
                }
                self.expect_sym(";")?;
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
    }

    /// `name` or `name[index]`.
    fn qasm_operand(&mut self) -> Result<Expr, FrontendError> {
        let pos = self.pos();
        let name = self.expect_ident()?;
        let var = Expr::Var(name, pos.clone());
        if self.eat_sym("[") {
            let idx = self.expr()?;
            self.expect_sym("]")?;
            return Ok(Expr::Index(Box::new(var), Box::new(idx), pos));
        }
        Ok(var)
    }

    fn skip_to_semicolon(&mut self) -> Result<(), FrontendError> {
        while !self.eat_sym(";") {
            self.next()?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse_kernels;
    use super::*;

    fn body(src: &str) -> Result<Vec<Stmt>, FrontendError> {
        parse_kernels(&format!("__qpu__ void k(qreg q) {{\nusing qk::openqasm;\n{src}\n}}")).map(|k| k[0].body.clone())
    }

    fn kinds(stmts: &[Stmt]) -> Vec<GateRef> {
        stmts
            .iter()
            .filter_map(|s| match s {
                Stmt::Gate { gate, .. } => Some(*gate),
                _ => None,
            })
            .collect()
    }

    #[test]
    fn gates_map_to_calls() {
        let b = body("OPENQASM 2.0; include \"qelib1.inc\"; h q[0]; cx q[0], q[1]; barrier q; rz(pi/2) q[1];").unwrap();
        assert_eq!(
            kinds(&b),
            vec![GateRef::Kind(GateKind::H), GateRef::Kind(GateKind::CX), GateRef::Kind(GateKind::Rz)]
        );
    }

    #[test]
    fn measure_and_registers() {
        let b = body("qreg r[2]; creg c[2]; measure r -> c; measure r[1] -> c[0];").unwrap();
        assert!(matches!(&b[0], Stmt::QregAlias { name, .. } if name == "r"));
        assert!(matches!(&b[1], Stmt::Creg { name, .. } if name == "c"));
        assert!(matches!(&b[2], Stmt::Gate { clbit: Some(Expr::Var(..)), .. }));
        assert!(matches!(&b[3], Stmt::Gate { clbit: Some(Expr::Index(..)), .. }));
    }

    #[test]
    fn comments_only() {
        assert!(body("// nothing\n/* here */").unwrap().is_empty());
    }

    #[test]
    fn unsupported_features() {
        for src in ["gate foo a { h a; }", "if (c == 1) x q[0];", "include \"other.inc\";", "opaque g a;", "frob q[0];"] {
            assert!(matches!(body(src), Err(FrontendError::UnsupportedQasmFeature { .. })), "{src}");
        }
        assert!(matches!(body("cx q[0];"), Err(FrontendError::Syntax { .. })));
    }

    #[test]
    fn switch_back_to_xasm() {
        let src = "__qpu__ void k(qreg q) {\nusing qk::openqasm;\nh q[0];\nusing qk::xasm;\nX(q[1]);\n}";
        let k = &parse_kernels(src).unwrap()[0];
        assert_eq!(kinds(&k.body), vec![GateRef::Kind(GateKind::H), GateRef::Kind(GateKind::X)]);
        assert_eq!(k.languages.len(), 3);
    }
}

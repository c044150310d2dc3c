//! Kernel definitions, the default XASM statement language and shared expression parsing.

use super::ast::*;
use super::lexer::{Tok, Token};
use super::{FrontendError, Pos};
use crate::ir::GateKind;

type PResult<T> = Result<T, FrontendError>;

pub(crate) struct Parser<'t> {
    toks: &'t [Token],
    pub(crate) i: usize,
    pub(crate) lang: SourceLanguage,
    pub(crate) languages: Vec<(SourceLanguage, Pos)>,
    end: Pos,
}

impl<'t> Parser<'t> {
    pub(crate) fn new(toks: &'t [Token], end: Pos) -> Self {
        Self { toks, i: 0, lang: SourceLanguage::Xasm, languages: Vec::new(), end }
    }

    pub(crate) fn peek(&self) -> Option<&'t Token> {
        self.toks.get(self.i)
    }

    pub(crate) fn peek_at(&self, k: usize) -> Option<&'t Token> {
        self.toks.get(self.i + k)
    }

    pub(crate) fn at_end(&self) -> bool {
        self.i >= self.toks.len()
    }

    pub(crate) fn pos(&self) -> Pos {
        self.peek().map_or_else(|| self.end.clone(), |t| t.pos.clone())
    }

    pub(crate) fn next(&mut self) -> PResult<&'t Token> {
        let t = self.toks.get(self.i).ok_or_else(|| self.error("unexpected end of input"))?;
        self.i += 1;
        Ok(t)
    }

    pub(crate) fn error(&self, message: impl Into<String>) -> FrontendError {
        FrontendError::Syntax { pos: self.pos(), message: message.into() }
    }

    fn unexpected(&self, wanted: &str) -> FrontendError {
        match self.peek() {
            Some(t) => self.error(format!("expected {wanted}, found {}", t.describe())),
            None => self.error(format!("expected {wanted}, found end of input")),
        }
    }

    pub(crate) fn at_sym(&self, s: &str) -> bool {
        self.peek().is_some_and(|t| t.is_sym(s))
    }

    pub(crate) fn at_ident(&self, s: &str) -> bool {
        self.peek().is_some_and(|t| t.is_ident(s))
    }

    pub(crate) fn eat_sym(&mut self, s: &str) -> bool {
        let hit = self.at_sym(s);
        if hit {
            self.i += 1;
        }
        hit
    }

    pub(crate) fn eat_ident(&mut self, s: &str) -> bool {
        let hit = self.at_ident(s);
        if hit {
            self.i += 1;
        }
        hit
    }

    pub(crate) fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("'{s}'")))
        }
    }

    pub(crate) fn expect_ident(&mut self) -> PResult<String> {
        match self.peek().and_then(Token::ident) {
            Some(s) => {
                self.i += 1;
                Ok(s.to_string())
            }
            None => Err(self.unexpected("identifier")),
        }
    }

    // ---- kernels ----

    pub(crate) fn kernels(&mut self) -> PResult<Vec<KernelDef>> {
        let mut out = Vec::new();
        while let Some(t) = self.peek() {
            if t.is_sym(";") {
                self.i += 1;
            } else if t.is_sym("}") || t.is_sym("{") {
                return Err(FrontendError::UnbalancedBraces { pos: t.pos.clone() });
            } else {
                out.push(self.kernel()?);
            }
        }
        Ok(out)
    }

    fn kernel(&mut self) -> PResult<KernelDef> {
        if !self.eat_ident("__qpu__") {
            return Err(self.unexpected("'__qpu__' kernel definition"));
        }
        if !self.eat_ident("void") {
            return Err(self.unexpected("'void'"));
        }
        let name = self.expect_ident()?;
        self.expect_sym("(")?;
        let mut params = Vec::new();
        while !self.eat_sym(")") {
            if !params.is_empty() {
                self.expect_sym(",")?;
            }
            let ty = self.param_type()?;
            self.eat_sym("&");
            let pname = match self.peek().and_then(Token::ident) {
                Some(s) => {
                    self.i += 1;
                    s.to_string()
                }
                None => format!("_arg{}", params.len()),
            };
            if params.iter().any(|p: &Param| p.name == pname) {
                return Err(self.error(format!("duplicate parameter '{pname}'")));
            }
            params.push(Param { name: pname, ty });
        }
        if !params.iter().any(|p| p.ty == ParamType::Qreg) {
            return Err(self.error(format!("kernel '{name}' must take at least one qreg parameter")));
        }
        let open = self.pos();
        self.expect_sym("{")?;
        let start = self.i;
        let mut depth = 1usize;
        while depth > 0 {
            let t = self.toks.get(self.i).ok_or(FrontendError::UnbalancedBraces { pos: open.clone() })?;
            if t.is_sym("{") {
                depth += 1;
            } else if t.is_sym("}") {
                depth -= 1;
            }
            self.i += 1;
        }
        let body_toks = &self.toks[start..self.i - 1];
        let close = self.toks[self.i - 1].pos.clone();
        let mut body = Parser::new(body_toks, close);
        body.languages.push((SourceLanguage::Xasm, open));
        let stmts = body.statements(false)?;
        Ok(KernelDef {
            signature: KernelSignature { name, params },
            body: stmts,
            languages: body.languages,
            declared_qubits: None,
        })
    }

    fn param_type(&mut self) -> PResult<ParamType> {
        self.eat_ident("const");
        let word = self.expect_ident()?;
        Ok(match word.as_str() {
            "qreg" => ParamType::Qreg,
            "double" | "float" => ParamType::Real,
            "int" | "int32_t" | "int64_t" | "size_t" | "long" | "unsigned" | "bool" => ParamType::Int,
            "std" | "vector" => {
                if word == "std" {
                    self.expect_sym("::")?;
                    if !self.eat_ident("vector") {
                        return Err(self.unexpected("'vector'"));
                    }
                }
                self.expect_sym("<")?;
                let inner = self.expect_ident()?;
                self.expect_sym(">")?;
                match inner.as_str() {
                    "double" | "float" => ParamType::RealVector,
                    "int" | "int32_t" | "int64_t" | "size_t" | "long" => ParamType::IntVector,
                    _ => return Err(self.error(format!("unsupported vector element type '{inner}'"))),
                }
            }
            _ => return Err(self.error(format!("unsupported parameter type '{word}'"))),
        })
    }

    // ---- statements ----

    /// Parses statements until end of input, or until a closing brace when `braced`.
    pub(crate) fn statements(&mut self, braced: bool) -> PResult<Vec<Stmt>> {
        let mut out = Vec::new();
        loop {
            if self.at_end() {
                if braced {
                    return Err(self.unexpected("'}'"));
                }
                return Ok(out);
            }
            if self.at_sym("}") {
                if braced {
                    self.i += 1;
                    return Ok(out);
                }
                return Err(FrontendError::UnbalancedBraces { pos: self.pos() });
            }
            if self.at_ident("using") {
                self.language_switch()?;
                continue;
            }
            match self.lang {
                SourceLanguage::Xasm | SourceLanguage::Decompose => {
                    if let Some(s) = self.xasm_statement()? {
                        out.push(s);
                    }
                }
                SourceLanguage::Openqasm => out.extend(self.qasm_statement()?),
                SourceLanguage::Quil => out.extend(self.quil_line()?),
            }
        }
    }

    fn language_switch(&mut self) -> PResult<()> {
        let pos = self.pos();
        self.i += 1;
        let ns = self.expect_ident()?;
        if ns != "qk" && ns != "qcor" {
            return Err(FrontendError::UnknownLanguage { pos, name: ns });
        }
        self.expect_sym("::")?;
        let name_pos = self.pos();
        let name = self.expect_ident()?;
        self.expect_sym(";")?;
        let lang = SourceLanguage::from_name(&name).ok_or(FrontendError::UnknownLanguage { pos: name_pos, name })?;
        self.lang = lang;
        self.languages.push((lang, pos));
        Ok(())
    }

    /// Either a braced block or a single statement.
    fn body(&mut self) -> PResult<Vec<Stmt>> {
        if self.eat_sym("{") {
            return self.statements(true);
        }
        if self.at_ident("using") {
            return Err(self.error("language switch must appear at statement level"));
        }
        Ok(self.xasm_statement()?.into_iter().collect())
    }

    fn xasm_statement(&mut self) -> PResult<Option<Stmt>> {
        let pos = self.pos();
        let t = self.peek().ok_or_else(|| self.unexpected("statement"))?;
        if t.is_sym(";") {
            self.i += 1;
            return Ok(None);
        }
        if t.is_sym("{") {
            self.i += 1;
            return Ok(Some(Stmt::Block(self.statements(true)?)));
        }
        if t.is_sym("++") || t.is_sym("--") {
            let s = self.simple_statement()?;
            self.expect_sym(";")?;
            return Ok(Some(s));
        }
        let word = t.ident().ok_or_else(|| self.unexpected("statement"))?.to_string();
        match word.as_str() {
            "for" => return self.for_statement().map(Some),
            "if" => {
                self.i += 1;
                self.expect_sym("(")?;
                let cond = self.expr()?;
                self.expect_sym(")")?;
                let then = self.body()?;
                let otherwise = if self.eat_ident("else") { self.body()? } else { Vec::new() };
                return Ok(Some(Stmt::If { cond, then, otherwise, pos }));
            }
            "decompose" => return self.decompose().map(Some),
            "return" => {
                self.i += 1;
                self.expect_sym(";")?;
                return Ok(None);
            }
            _ => {}
        }
        let s = self.simple_statement()?;
        self.expect_sym(";")?;
        Ok(Some(s))
    }

    fn decl_type(&mut self) -> Option<DeclType> {
        let save = self.i;
        let mut saw_const = false;
        while self.eat_ident("const") || self.eat_ident("constexpr") {
            saw_const = true;
        }
        let ty = match self.peek().and_then(Token::ident) {
            Some("auto") => Some(DeclType::Auto),
            Some("int" | "int32_t" | "int64_t" | "uint32_t" | "uint64_t" | "size_t" | "long" | "unsigned") => {
                Some(DeclType::Int)
            }
            Some("double" | "float") => Some(DeclType::Real),
            Some("bool") => Some(DeclType::Bool),
            Some("std") if self.peek_at(1).is_some_and(|t| t.is_sym("::")) && self.peek_at(2).is_some_and(|t| t.is_ident("size_t")) => {
                self.i += 2;
                Some(DeclType::Int)
            }
            _ => None,
        };
        match ty {
            Some(ty) => {
                self.i += 1;
                while self.eat_sym("&") {}
                Some(ty)
            }
            None => {
                if saw_const {
                    self.i = save;
                }
                None
            }
        }
    }

    /// Declarations, assignments, increments and calls, without the trailing `;`.
    fn simple_statement(&mut self) -> PResult<Stmt> {
        let pos = self.pos();
        if let Some(ty) = self.decl_type() {
            let name = self.expect_ident()?;
            if !self.eat_sym("=") {
                let value = match ty {
                    DeclType::Real => Expr::Real(0.0),
                    DeclType::Bool => Expr::Bool(false),
                    _ => Expr::Int(0),
                };
                return Ok(Stmt::Let { name, ty, value, pos });
            }
            let value = self.expr()?;
            if let Expr::Call(f, args, _) = &value {
                if f == "Measure" && args.len() == 1 {
                    return Ok(Stmt::LetBit { name, qubit: args[0].clone(), pos });
                }
            }
            return Ok(Stmt::Let { name, ty, value, pos });
        }
        if self.at_sym("++") || self.at_sym("--") {
            let op = if self.next()?.is_sym("++") { BinOp::Add } else { BinOp::Sub };
            let name = self.expect_ident()?;
            return Ok(Stmt::Assign { name, op: Some(op), value: Expr::Int(1), pos });
        }
        let name = self.expect_ident()?;
        if self.eat_sym("::") {
            let pos_mode = self.pos();
            let mode = self.expect_ident()?;
            self.expect_sym("(")?;
            let mut args = self.args(")")?;
            let mode = match mode.as_str() {
                "adjoint" => CallMode::Adjoint,
                "ctrl" => {
                    if args.is_empty() {
                        return Err(FrontendError::Syntax { pos: pos_mode, message: "ctrl needs a control qubit".into() });
                    }
                    CallMode::Ctrl(args.remove(0))
                }
                other => {
                    return Err(FrontendError::Syntax { pos: pos_mode, message: format!("unknown kernel modifier '{other}'") })
                }
            };
            return Ok(Stmt::KernelCall { name, mode, args, pos });
        }
        if self.eat_sym("(") {
            let args = self.args(")")?;
            if name == "exp_i_theta" {
                let [qreg, theta, op]: [Expr; 3] =
                    args.try_into().map_err(|_| FrontendError::Syntax { pos: pos.clone(), message: "exp_i_theta takes (qreg, angle, operator)".into() })?;
                return Ok(Stmt::ExpITheta { qreg, theta, op, pos });
            }
            if let Some(kind) = GateKind::from_xasm(&name) {
                let gate = GateRef::Kind(kind);
                let (arity, nparams) = (gate.arity(), gate.param_count());
                if args.len() != arity + nparams {
                    return Err(FrontendError::Syntax {
                        pos,
                        message: format!("{name} takes {arity} qubit(s) and {nparams} angle(s), got {} argument(s)", args.len()),
                    });
                }
                let mut qubits = args;
                let params = qubits.split_off(arity);
                return Ok(Stmt::Gate { gate, qubits, params, clbit: None, pos });
            }
            return Ok(Stmt::KernelCall { name, mode: CallMode::Plain, args, pos });
        }
        let op = match self.peek() {
            Some(t) if t.is_sym("=") => None,
            Some(t) if t.is_sym("+=") => Some(BinOp::Add),
            Some(t) if t.is_sym("-=") => Some(BinOp::Sub),
            Some(t) if t.is_sym("*=") => Some(BinOp::Mul),
            Some(t) if t.is_sym("/=") => Some(BinOp::Div),
            Some(t) if t.is_sym("++") => {
                self.i += 1;
                return Ok(Stmt::Assign { name, op: Some(BinOp::Add), value: Expr::Int(1), pos });
            }
            Some(t) if t.is_sym("--") => {
                self.i += 1;
                return Ok(Stmt::Assign { name, op: Some(BinOp::Sub), value: Expr::Int(1), pos });
            }
            _ => return Err(self.unexpected("'(', '=' or '::' after identifier")),
        };
        self.i += 1;
        let value = self.expr()?;
        Ok(Stmt::Assign { name, op, value, pos })
    }

    fn args(&mut self, close: &str) -> PResult<Vec<Expr>> {
        let mut out = Vec::new();
        if self.eat_sym(close) {
            return Ok(out);
        }
        loop {
            out.push(self.expr()?);
            if self.eat_sym(close) {
                return Ok(out);
            }
            self.expect_sym(",")?;
        }
    }

    fn for_statement(&mut self) -> PResult<Stmt> {
        let pos = self.pos();
        self.i += 1;
        self.expect_sym("(")?;
        if self.is_range_for() {
            self.decl_type();
            let (index, var) = if self.eat_sym("[") {
                let a = self.expect_ident()?;
                self.expect_sym(",")?;
                let b = self.expect_ident()?;
                self.expect_sym("]")?;
                (Some(a), b)
            } else {
                (None, self.expect_ident()?)
            };
            self.expect_sym(":")?;
            let mut iterable = self.expr()?;
            self.expect_sym(")")?;
            let mut enumerate = false;
            if let Expr::Call(f, args, _) = &iterable {
                if f == "enumerate" && args.len() == 1 {
                    enumerate = true;
                    iterable = args[0].clone();
                }
            }
            if index.is_some() && !enumerate {
                return Err(FrontendError::Syntax { pos, message: "structured binding needs enumerate(...)".into() });
            }
            let body = self.body()?;
            return Ok(Stmt::ForEach { index, var, iterable, enumerate, body, pos });
        }
        let init = if self.at_sym(";") { None } else { Some(Box::new(self.simple_statement()?)) };
        self.expect_sym(";")?;
        let cond = if self.at_sym(";") { None } else { Some(self.expr()?) };
        self.expect_sym(";")?;
        let update = if self.at_sym(")") { None } else { Some(self.loop_update()?) };
        self.expect_sym(")")?;
        let body = self.body()?;
        Ok(Stmt::For { init, cond, update, body, pos })
    }

    fn is_range_for(&self) -> bool {
        let mut depth = 0i32;
        for t in &self.toks[self.i..] {
            match &t.tok {
                Tok::Sym("(" | "[") => depth += 1,
                Tok::Sym(")" | "]") => {
                    if depth == 0 {
                        return false;
                    }
                    depth -= 1;
                }
                Tok::Sym(";") => return false,
                Tok::Sym(":") if depth == 0 => return true,
                _ => {}
            }
        }
        false
    }

    fn loop_update(&mut self) -> PResult<LoopUpdate> {
        match self.simple_statement()? {
            Stmt::Assign { name, op: Some(op), value, .. } => Ok(LoopUpdate::Step(name, op, value)),
            Stmt::Assign { name, op: None, value, .. } => Ok(LoopUpdate::Assign(name, value)),
            _ => Err(self.error("unsupported loop update")),
        }
    }

    fn decompose(&mut self) -> PResult<Stmt> {
        let pos = self.pos();
        self.i += 1;
        self.expect_sym("{")?;
        let mut matrix: Option<(String, MatrixInit, (Expr, Expr))> = None;
        let mut entries = Vec::new();
        while !self.eat_sym("}") {
            if self.eat_sym(";") {
                continue;
            }
            if self.eat_ident("UnitaryMatrix") || self.eat_ident("auto") {
                let name = self.expect_ident()?;
                self.expect_sym("=")?;
                if !self.eat_ident("UnitaryMatrix") {
                    return Err(self.unexpected("'UnitaryMatrix'"));
                }
                self.expect_sym("::")?;
                let ctor_pos = self.pos();
                let init = match self.expect_ident()?.as_str() {
                    "Identity" => MatrixInit::Identity,
                    "Zero" => MatrixInit::Zero,
                    other => {
                        return Err(FrontendError::Syntax { pos: ctor_pos, message: format!("unknown matrix constructor '{other}'") })
                    }
                };
                self.expect_sym("(")?;
                let rows = self.expr()?;
                self.expect_sym(",")?;
                let cols = self.expr()?;
                self.expect_sym(")")?;
                self.expect_sym(";")?;
                matrix = Some((name, init, (rows, cols)));
                continue;
            }
            let name_pos = self.pos();
            let name = self.expect_ident()?;
            if matrix.as_ref().is_none_or(|m| m.0 != name) {
                return Err(FrontendError::Syntax { pos: name_pos, message: format!("'{name}' is not a declared UnitaryMatrix") });
            }
            self.expect_sym("(")?;
            let row = self.expr()?;
            self.expect_sym(",")?;
            let col = self.expr()?;
            self.expect_sym(")")?;
            self.expect_sym("=")?;
            let (re, im) = self.complex_value()?;
            self.expect_sym(";")?;
            entries.push(MatrixEntry { row, col, re, im });
        }
        let (_, init, size) = matrix.ok_or_else(|| FrontendError::Syntax { pos: pos.clone(), message: "decompose block declares no UnitaryMatrix".into() })?;
        self.expect_sym("(")?;
        let target = self.expr()?;
        let mut method = None;
        let mut tolerance = None;
        while self.eat_sym(",") {
            let key = match &self.next()?.tok {
                Tok::Ident(s) | Tok::Str(s) => s.clone(),
                _ => return Err(self.error("expected decompose option")),
            };
            if self.eat_sym("=") || self.eat_sym(":") {
                let value = match &self.next()?.tok {
                    Tok::Ident(s) | Tok::Str(s) => s.clone(),
                    Tok::Int(i) => i.to_string(),
                    Tok::Real(r) => r.to_string(),
                    Tok::Sym(_) => return Err(self.error("expected option value")),
                };
                match key.as_str() {
                    "method" => method = Some(value),
                    "tolerance" => {
                        tolerance = Some(value.parse().map_err(|_| self.error(format!("invalid tolerance '{value}'")))?)
                    }
                    _ => {}
                }
            } else {
                method = Some(key);
            }
        }
        self.expect_sym(")")?;
        self.expect_sym(";")?;
        Ok(Stmt::Decompose { size, init, entries, target, method, tolerance, pos })
    }

    /// `expr`, `{re, im}` or `std::complex<double>(re, im)`.
    fn complex_value(&mut self) -> PResult<(Expr, Expr)> {
        if self.eat_sym("{") {
            let re = self.expr()?;
            self.expect_sym(",")?;
            let im = self.expr()?;
            self.expect_sym("}")?;
            return Ok((re, im));
        }
        if self.at_ident("std") && self.peek_at(2).is_some_and(|t| t.is_ident("complex")) {
            self.i += 3;
            if self.eat_sym("<") {
                self.expect_ident()?;
                self.expect_sym(">")?;
            }
            self.expect_sym("(")?;
            let re = self.expr()?;
            self.expect_sym(",")?;
            let im = self.expr()?;
            self.expect_sym(")")?;
            return Ok((re, im));
        }
        Ok((self.expr()?, Expr::Real(0.0)))
    }

    // ---- expressions ----

    pub(crate) fn expr(&mut self) -> PResult<Expr> {
        self.binary(0)
    }

    fn binary(&mut self, level: usize) -> PResult<Expr> {
        const LEVELS: &[&[(&str, BinOp)]] = &[
            &[("||", BinOp::Or)],
            &[("&&", BinOp::And)],
            &[("==", BinOp::Eq), ("!=", BinOp::Ne)],
            &[("<=", BinOp::Le), (">=", BinOp::Ge), ("<", BinOp::Lt), (">", BinOp::Gt)],
            &[("<<", BinOp::Shl), (">>", BinOp::Shr)],
            &[("+", BinOp::Add), ("-", BinOp::Sub)],
            &[("*", BinOp::Mul), ("/", BinOp::Div), ("%", BinOp::Rem)],
        ];
        if level == LEVELS.len() {
            return self.unary();
        }
        let mut lhs = self.binary(level + 1)?;
        loop {
            let pos = self.pos();
            let Some(&(_, op)) = LEVELS[level].iter().find(|(s, _)| self.at_sym(s)) else {
                return Ok(lhs);
            };
            self.i += 1;
            let rhs = self.binary(level + 1)?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs), pos);
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        let pos = self.pos();
        if self.eat_sym("-") {
            return Ok(Expr::Unary(UnOp::Neg, Box::new(self.unary()?), pos));
        }
        if self.eat_sym("!") {
            return Ok(Expr::Unary(UnOp::Not, Box::new(self.unary()?), pos));
        }
        if self.eat_sym("+") {
            return self.unary();
        }
        self.postfix()
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut e = self.primary()?;
        loop {
            let pos = self.pos();
            if self.eat_sym("[") {
                let idx = self.expr()?;
                self.expect_sym("]")?;
                e = Expr::Index(Box::new(e), Box::new(idx), pos);
            } else if self.eat_sym(".") {
                let member = self.expect_ident()?;
                if member != "size" {
                    return Err(FrontendError::Syntax { pos, message: format!("unsupported member '{member}'") });
                }
                self.expect_sym("(")?;
                self.expect_sym(")")?;
                e = Expr::Size(Box::new(e), pos);
            } else {
                return Ok(e);
            }
        }
    }

    fn primary(&mut self) -> PResult<Expr> {
        let pos = self.pos();
        let t = self.next()?;
        match &t.tok {
            Tok::Int(i) => Ok(Expr::Int(*i)),
            Tok::Real(r) => Ok(Expr::Real(*r)),
            Tok::Sym("(") => {
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Ident(first) => {
                let mut path = first.clone();
                while self.at_sym("::") && self.peek_at(1).is_some_and(|t| t.ident().is_some()) {
                    self.i += 1;
                    path.push_str("::");
                    path.push_str(self.expect_ident()?.as_str());
                }
                let short = path.rsplit("::").next().unwrap_or(&path).to_string();
                match path.as_str() {
                    "true" => return Ok(Expr::Bool(true)),
                    "false" => return Ok(Expr::Bool(false)),
                    "pi" | "M_PI" | "constants::pi" | "std::numbers::pi" => return Ok(Expr::Real(std::f64::consts::PI)),
                    _ => {}
                }
                if self.eat_sym("(") {
                    let args = self.args(")")?;
                    return Ok(Expr::Call(short, args, pos));
                }
                Ok(Expr::Var(path, pos))
            }
            _ => Err(FrontendError::Syntax { pos, message: format!("expected expression, found {}", t.describe()) }),
        }
    }
}

use std::fmt;

use serde::Serialize;

use super::Pos;
use crate::ir::GateKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceLanguage {
    Xasm,
    Openqasm,
    Quil,
    Decompose,
}

impl SourceLanguage {
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "xasm" => Some(Self::Xasm),
            "openqasm" => Some(Self::Openqasm),
            "quil" => Some(Self::Quil),
            "decompose" | "unitary" => Some(Self::Decompose),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParamType {
    Qreg,
    Real,
    Int,
    RealVector,
    IntVector,
}

impl fmt::Display for ParamType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ParamType::Qreg => "qreg",
            ParamType::Real => "double",
            ParamType::Int => "int",
            ParamType::RealVector => "std::vector<double>",
            ParamType::IntVector => "std::vector<int>",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Param {
    pub name: String,
    pub ty: ParamType,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelSignature {
    pub name: String,
    pub params: Vec<Param>,
}

impl KernelSignature {
    /// Parameters other than qubit registers, in order.
    pub fn classical_params(&self) -> impl Iterator<Item = &Param> {
        self.params.iter().filter(|p| p.ty != ParamType::Qreg)
    }
}

impl fmt::Display for KernelSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let params: Vec<String> = self.params.iter().map(|p| format!("{} {}", p.ty, p.name)).collect();
        write!(f, "{}({})", self.name, params.join(", "))
    }
}

/// A parsed kernel: signature plus body AST.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelDef {
    pub signature: KernelSignature,
    pub body: Vec<Stmt>,
    /// Language in effect from each position onward.
    pub languages: Vec<(SourceLanguage, Pos)>,
    /// Register size declared by a standalone OpenQASM file, if any.
    pub declared_qubits: Option<usize>,
}

impl KernelDef {
    pub fn name(&self) -> &str {
        &self.signature.name
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Shl,
    Shr,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Int(i64),
    Real(f64),
    Bool(bool),
    Var(String, Pos),
    Index(Box<Expr>, Box<Expr>, Pos),
    /// `x.size()`
    Size(Box<Expr>, Pos),
    Unary(UnOp, Box<Expr>, Pos),
    Binary(BinOp, Box<Expr>, Box<Expr>, Pos),
    Call(String, Vec<Expr>, Pos),
}

/// Gate spelled in a kernel; composite entries expand to several primitives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateRef {
    Kind(GateKind),
    /// Identity; emits nothing.
    Id,
    Ccx,
    Cswap,
    Rzz,
    U2,
    Cu3,
}

impl GateRef {
    pub fn arity(self) -> usize {
        match self {
            GateRef::Kind(k) => k.arity(),
            GateRef::Id | GateRef::U2 => 1,
            GateRef::Rzz | GateRef::Cu3 => 2,
            GateRef::Ccx | GateRef::Cswap => 3,
        }
    }

    pub fn param_count(self) -> usize {
        match self {
            GateRef::Kind(k) => k.param_count(),
            GateRef::Id | GateRef::Ccx | GateRef::Cswap => 0,
            GateRef::Rzz => 1,
            GateRef::U2 => 2,
            GateRef::Cu3 => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CallMode {
    Plain,
    Adjoint,
    Ctrl(Expr),
}

/// Declared type of a local; `Auto` keeps the initializer's type.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeclType {
    Auto,
    Int,
    Real,
    Bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LoopUpdate {
    /// `i++`, `i += k`, ...
    Step(String, BinOp, Expr),
    Assign(String, Expr),
}

/// One assignment `m(row, col) = value` inside a `decompose` block.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixEntry {
    pub row: Expr,
    pub col: Expr,
    pub re: Expr,
    pub im: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MatrixInit {
    Identity,
    Zero,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stmt {
    Gate { gate: GateRef, qubits: Vec<Expr>, params: Vec<Expr>, clbit: Option<Expr>, pos: Pos },
    KernelCall { name: String, mode: CallMode, args: Vec<Expr>, pos: Pos },
    For { init: Option<Box<Stmt>>, cond: Option<Expr>, update: Option<LoopUpdate>, body: Vec<Stmt>, pos: Pos },
    /// `for (auto x : v)` or `for (auto [i, x] : enumerate(v))`.
    ForEach { index: Option<String>, var: String, iterable: Expr, enumerate: bool, body: Vec<Stmt>, pos: Pos },
    If { cond: Expr, then: Vec<Stmt>, otherwise: Vec<Stmt>, pos: Pos },
    Let { name: String, ty: DeclType, value: Expr, pos: Pos },
    Assign { name: String, op: Option<BinOp>, value: Expr, pos: Pos },
    /// `const bool b = Measure(q[i]);`
    LetBit { name: String, qubit: Expr, pos: Pos },
    Decompose { size: (Expr, Expr), init: MatrixInit, entries: Vec<MatrixEntry>, target: Expr, method: Option<String>, tolerance: Option<f64>, pos: Pos },
    ExpITheta { qreg: Expr, theta: Expr, op: Expr, pos: Pos },
    /// OpenQASM `qreg name[n];`, aliased onto the kernel register.
    QregAlias { name: String, size: Expr, pos: Pos },
    /// OpenQASM `creg name[n];`
    Creg { name: String, size: Expr, pos: Pos },
    Block(Vec<Stmt>),
}

//! Kernel frontend: lexing, multi-language parsing, instantiation into circuits and the
//! runtime kernel registry.
//!
//! Kernels look like
//!
//! ```text
//! __qpu__ void bell(qreg q) {
//!   H(q[0]);
//!   using qk::openqasm;
//!   cx q[0], q[1];
//!   using qk::xasm;
//!   for (int i = 0; i < q.size(); i++) { Measure(q[i]); }
//! }
//! ```
//!
//! The default body language is XASM; `using qk::<lang>;` (or `using qcor::<lang>;`) switches
//! between `xasm`, `openqasm` and `quil` at statement boundaries.

mod ast;
mod interp;
mod lexer;
mod parser;
mod qasm;
mod quil;
mod registry;
mod stdlib;
mod synthesis;

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use thiserror::Error;

pub use ast::*;
pub use interp::{instantiate, KernelArg, StreamOutcome};
pub use lexer::{tokenize, Tok, Token};
pub use registry::{KernelHandle, KernelRegistry};
pub use stdlib::{iqft, qft, STDLIB_KERNELS};
pub use synthesis::{decompose_unitary, MAX_SYNTHESIS_QUBITS, UNITARITY_TOL};

use crate::backend::BackendError;
use crate::hybrid::HybridError;
use crate::ir::IrError;

/// Source location; lines and columns start at 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Pos {
    pub file: Arc<str>,
    pub line: usize,
    pub col: usize,
}

impl Pos {
    pub fn new(file: &str, line: usize, col: usize) -> Self {
        Self { file: file.into(), line, col }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.col)
    }
}

#[derive(Debug, Error)]
pub enum FrontendError {
    #[error("{pos}: syntax error: {message}")]
    Syntax { pos: Pos, message: String },
    #[error("{pos}: unknown kernel language '{name}'")]
    UnknownLanguage { pos: Pos, name: String },
    #[error("{pos}: unbalanced braces")]
    UnbalancedBraces { pos: Pos },
    #[error("{pos}: unsupported OpenQASM feature: {feature}")]
    UnsupportedQasmFeature { pos: Pos, feature: String },
    #[error("{pos}: unsupported Quil feature: {feature}")]
    UnsupportedQuilFeature { pos: Pos, feature: String },
    #[error("{pos}: cannot include '{path}': {message}")]
    Include { pos: Pos, path: String, message: String },
    #[error("{pos}: unresolved kernel '{name}'")]
    UnresolvedKernel { pos: Pos, name: String },
    #[error("{pos}: control flow depends on a measurement result; run with the ftqc runtime")]
    MeasurementDependentBranchInNisqMode { pos: Pos },
    #[error("kernel '{kernel}': {message}")]
    ArgumentMismatch { kernel: String, message: String },
    #[error("unknown kernel '{0}'")]
    UnknownKernelName(String),
    #[error("{0}")]
    RangeError(String),
    #[error("matrix is not unitary (deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },
    #[error("matrix of dimension {dim} does not act on {qubits} qubit(s)")]
    DimensionMismatch { dim: usize, qubits: usize },
    #[error("synthesis supports at most {max} qubits, got {got}")]
    TooManyQubitsForSynthesis { max: usize, got: usize },
    #[error("{pos}: unknown synthesis method '{method}' (available: givens)")]
    UnknownSynthesisMethod { pos: Pos, method: String },
    #[error("{pos}: {message}")]
    Eval { pos: Pos, message: String },
    #[error("{pos}: kernel call depth exceeds {limit}")]
    RecursionLimit { pos: Pos, limit: usize },
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Ir(#[from] IrError),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Hybrid(#[from] Box<HybridError>),
}

impl FrontendError {
    /// Source position, when the error has one.
    pub fn pos(&self) -> Option<&Pos> {
        use FrontendError::*;
        match self {
            Syntax { pos, .. }
            | UnknownLanguage { pos, .. }
            | UnbalancedBraces { pos }
            | UnsupportedQasmFeature { pos, .. }
            | UnsupportedQuilFeature { pos, .. }
            | Include { pos, .. }
            | UnresolvedKernel { pos, .. }
            | MeasurementDependentBranchInNisqMode { pos }
            | UnknownSynthesisMethod { pos, .. }
            | Eval { pos, .. }
            | RecursionLimit { pos, .. } => Some(pos),
            _ => None,
        }
    }
}

impl From<HybridError> for FrontendError {
    fn from(e: HybridError) -> Self {
        FrontendError::Hybrid(Box::new(e))
    }
}

/// Parses every `__qpu__` kernel in `source`.
pub fn parse_kernels(source: &str) -> Result<Vec<KernelDef>, FrontendError> {
    parse_kernels_in(source, "<input>", None)
}

/// Like [`parse_kernels`], resolving `#include` paths against `base_dir`.
pub fn parse_kernels_in(source: &str, file: &str, base_dir: Option<&Path>) -> Result<Vec<KernelDef>, FrontendError> {
    let toks = tokenize(source, file, base_dir)?;
    let end = toks.last().map_or_else(|| Pos::new(file, 1, 1), |t| t.pos.clone());
    parser::Parser::new(&toks, end).kernels()
}

/// Parses OpenQASM statements (no kernel wrapper).
pub fn parse_openqasm(tokens: &[Token]) -> Result<Vec<Stmt>, FrontendError> {
    body_in(tokens, SourceLanguage::Openqasm)
}

/// Parses Quil lines (no kernel wrapper).
pub fn parse_quil(tokens: &[Token]) -> Result<Vec<Stmt>, FrontendError> {
    body_in(tokens, SourceLanguage::Quil)
}

fn body_in(tokens: &[Token], lang: SourceLanguage) -> Result<Vec<Stmt>, FrontendError> {
    let end = tokens.last().map_or_else(|| Pos::new("<input>", 1, 1), |t| t.pos.clone());
    let mut p = parser::Parser::new(tokens, end);
    p.lang = lang;
    p.statements(false)
}

/// Wraps a standalone OpenQASM program as a kernel `name(qreg q)`. Its `qreg` declarations
/// are laid out back to back on `q`, and their total is recorded as the kernel's size.
pub fn parse_qasm_program(source: &str, name: &str, file: &str, base_dir: Option<&Path>) -> Result<KernelDef, FrontendError> {
    let toks = tokenize(source, file, base_dir)?;
    let body = parse_openqasm(&toks)?;
    let mut declared = 0usize;
    for stmt in &body {
        if let Stmt::QregAlias { size: Expr::Int(n), .. } = stmt {
            declared += usize::try_from(*n).unwrap_or(0);
        }
    }
    let start = toks.first().map_or_else(|| Pos::new(file, 1, 1), |t| t.pos.clone());
    Ok(KernelDef {
        signature: KernelSignature { name: name.to_string(), params: vec![Param { name: "__qasm_reg".into(), ty: ParamType::Qreg }] },
        body,
        languages: vec![(SourceLanguage::Openqasm, start)],
        declared_qubits: (declared > 0).then_some(declared),
    })
}

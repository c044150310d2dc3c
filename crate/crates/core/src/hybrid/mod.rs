//! Variational layer: operators, observation, objective functions, optimizers and
//! asynchronous task launch.

mod fermion;
mod objective;
mod observe;
mod optimizer;
mod pauli;
mod task;
mod trotter;

use thiserror::Error;

pub use fermion::{jordan_wigner, FermionOperator, Ladder};
pub use objective::{central_difference_gradient, ArgsTranslator, Evaluation, ObjectiveFunction, GATHER_STATISTICS};
pub use observe::{exact_expectation, expectation, measure_term, observe, pauli_expectation, MeasuredTerm, Observation, HERMITIAN_TOL};
pub use optimizer::{create_optimizer, optimize, optimize_from, Adam, NelderMead, ObjectiveFn, Optimizer, ResultsBuffer, OPTIMIZERS};
pub use pauli::{Pauli, PauliOperator, PauliString, COEFF_TOL, X, Y, Z};
pub use task::{sync, task_initiate, Handle};
pub use trotter::{exp_i_theta, REAL_COEFF_TOL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HybridError {
    #[error("operator parse error at position {position}: {message}")]
    OperatorParse { position: usize, message: String },
    #[error("circuit already contains measurements")]
    AlreadyMeasured,
    #[error("operator term {term} has imaginary coefficient {imag:e}")]
    NonHermitianOperator { term: String, imag: f64 },
    #[error("generator term {term} has imaginary coefficient {imag:e}")]
    ComplexCoefficient { term: String, imag: f64 },
    #[error("expected {expected} parameter(s), got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("no default argument translator for kernel signature {0}; supply one")]
    NoDefaultTranslatorForSignature(String),
    #[error("objective evaluation failed: {0}")]
    ObjectiveEvaluation(String),
    #[error("handle already synchronized")]
    DoubleSync,
    #[error("unknown optimizer '{0}' (available: nelder-mead, adam)")]
    UnknownOptimizer(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Backend(#[from] crate::backend::BackendError),
}

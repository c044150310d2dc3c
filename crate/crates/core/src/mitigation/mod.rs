//! Error-mitigation decorators. Each one wraps a [`Backend`] and is itself a backend, so they
//! stack: the first name in a chain sits closest to the hardware.

mod readout;
mod zne;

use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

pub use readout::{apply_inverse_confusion, ConfusionMatrix, ReadoutMitigator, MAX_CALIBRATION_QUBITS};
pub use zne::{fold_global, linear_extrapolate, ZneMitigator, ZNE_SCALES};

use crate::backend::Backend;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MitigationError {
    #[error("readout calibration supports at most {max} measured qubits, got {got}")]
    TooManyQubitsForCalibration { max: usize, got: usize },
    #[error("confusion matrix for qubit {qubit} is singular (p01 + p10 = {sum:.4} >= 1)")]
    SingularConfusionMatrix { qubit: usize, sum: f64 },
    #[error("cannot fold a circuit whose non-measurement part contains {0}")]
    FoldingNonUnitary(String),
    #[error("noise scale {0} is not a positive odd integer")]
    InvalidScale(usize),
    #[error("extrapolation needs at least two distinct scales")]
    DegenerateFit,
    #[error("unknown error-mitigation strategy '{0}' (available: ro-error, zne)")]
    UnknownDecorator(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decorator {
    ReadoutError,
    Zne,
}

impl FromStr for Decorator {
    type Err = MitigationError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ro-error" => Ok(Decorator::ReadoutError),
            "zne" | "mitiq" => Ok(Decorator::Zne),
            _ => Err(MitigationError::UnknownDecorator(s.to_string())),
        }
    }
}

impl Decorator {
    pub fn name(self) -> &'static str {
        match self {
            Decorator::ReadoutError => "ro-error",
            Decorator::Zne => "zne",
        }
    }
}

/// Ordered decorators, in command-line order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MitigationChain {
    pub decorators: Vec<Decorator>,
}

impl MitigationChain {
    pub fn parse<S: AsRef<str>>(names: &[S]) -> Result<Self, MitigationError> {
        Ok(Self { decorators: names.iter().map(|n| n.as_ref().parse()).collect::<Result<_, _>>()? })
    }

    pub fn is_empty(&self) -> bool {
        self.decorators.is_empty()
    }

    /// Wraps `base`; the first decorator is applied first, so later ones see its output.
    pub fn wrap(&self, base: Arc<dyn Backend>) -> Arc<dyn Backend> {
        self.decorators.iter().fold(base, |inner, d| match d {
            Decorator::ReadoutError => Arc::new(ReadoutMitigator::new(inner)) as Arc<dyn Backend>,
            Decorator::Zne => Arc::new(ZneMitigator::new(inner)),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::{BackendError, ExecRequest, QRegBuffer, StatevectorSimulator};
    use crate::ir::{Circuit, Instruction};
    use std::sync::Mutex;

    /// Records the circuit sizes it is asked to run.
    struct Tracer {
        inner: StatevectorSimulator,
        log: Mutex<Vec<usize>>,
    }

    impl Backend for Tracer {
        fn name(&self) -> String {
            "tracer".into()
        }
        fn execute(&self, c: &Circuit, b: &mut QRegBuffer, r: &ExecRequest) -> Result<(), BackendError> {
            self.log.lock().unwrap().push(c.flatten().len());
            self.inner.execute(c, b, r)
        }
    }

    #[test]
    fn parse_and_order() {
        let chain = MitigationChain::parse(&["ro-error", "zne"]).unwrap();
        assert_eq!(chain.decorators, vec![Decorator::ReadoutError, Decorator::Zne]);
        assert_eq!(MitigationChain::parse(&["pec"]), Err(MitigationError::UnknownDecorator("pec".into())));
        let wrapped = chain.wrap(Arc::new(StatevectorSimulator::new()));
        assert_eq!(wrapped.name(), "zne(ro-error(sim))");
    }

    #[test]
    fn readout_runs_inside_each_scale() {
        let tracer = Arc::new(Tracer { inner: StatevectorSimulator::new(), log: Mutex::new(Vec::new()) });
        let chain = MitigationChain::parse(&["ro-error", "zne"]).unwrap();
        let backend = chain.wrap(tracer.clone());
        let c = Circuit::from_instructions("c", [Instruction::x(0), Instruction::measure(0)]);
        let mut buf = QRegBuffer::new("q", 1).unwrap();
        backend.execute(&c, &mut buf, &ExecRequest::sampled(100, 1)).unwrap();
        // Scale 1 (2 instructions), the calibration pair (1 and 2) once, then scales 3 and 5.
        assert_eq!(*tracer.log.lock().unwrap(), vec![2, 1, 2, 4, 6]);
        assert!((buf.exp_val_z().unwrap() + 1.0).abs() < 1e-9);
    }
}

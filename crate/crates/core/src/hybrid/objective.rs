//! Objective functions: a parameterized kernel paired with an observable.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::sync::{Arc, Mutex, PoisonError};

use serde::Serialize;

use super::{expectation, HybridError, PauliOperator};
use crate::backend::{Backend, ExecRequest, Shots, StatevectorSimulator};
use crate::frontend::{KernelArg, KernelHandle, ParamType};

/// Option key: evaluate this many times and report the mean.
pub const GATHER_STATISTICS: &str = "vqe-gather-statistics";

/// Maps a flat parameter vector to the kernel's full argument list.
pub type ArgsTranslator = Arc<dyn Fn(&[f64]) -> Vec<KernelArg> + Send + Sync>;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    pub iter: usize,
    pub params: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum DefaultShape {
    NoClassical,
    Real,
    RealVector,
}

pub struct ObjectiveFunction {
    kernel: KernelHandle,
    operator: PauliOperator,
    n_params: usize,
    n_qubits: usize,
    translator: Option<ArgsTranslator>,
    shape: Option<DefaultShape>,
    backend: Arc<dyn Backend>,
    shots: Shots,
    seed: u64,
    gather: usize,
    options: BTreeMap<String, String>,
    history: Mutex<Vec<Evaluation>>,
}

impl fmt::Debug for ObjectiveFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ObjectiveFunction")
            .field("kernel", &self.kernel.name())
            .field("operator", &self.operator.to_string())
            .field("n_params", &self.n_params)
            .field("backend", &self.backend.name())
            .field("options", &self.options)
            .finish()
    }
}

impl ObjectiveFunction {
    /// Uses the default translator, which needs the kernel's classical parameters to be a
    /// single `double` (with `n_params == 1`), a single `std::vector<double>`, or nothing.
    pub fn new(kernel: KernelHandle, operator: PauliOperator, n_params: usize) -> Result<Self, HybridError> {
        let classical: Vec<ParamType> = kernel.signature().classical_params().map(|p| p.ty).collect();
        let shape = match classical.as_slice() {
            [] => DefaultShape::NoClassical,
            [ParamType::Real] if n_params == 1 => DefaultShape::Real,
            [ParamType::RealVector] => DefaultShape::RealVector,
            _ => return Err(HybridError::NoDefaultTranslatorForSignature(kernel.signature().to_string())),
        };
        let mut obj = Self::build(kernel, operator, n_params, None);
        obj.shape = Some(shape);
        Ok(obj)
    }

    pub fn with_translator(kernel: KernelHandle, operator: PauliOperator, n_params: usize, translator: ArgsTranslator) -> Self {
        Self::build(kernel, operator, n_params, Some(translator))
    }

    fn build(kernel: KernelHandle, operator: PauliOperator, n_params: usize, translator: Option<ArgsTranslator>) -> Self {
        let n_qubits = operator.num_qubits().max(kernel.def().declared_qubits.unwrap_or(0)).max(1);
        Self {
            kernel,
            operator,
            n_params,
            n_qubits,
            translator,
            shape: None,
            backend: Arc::new(StatevectorSimulator::new()),
            shots: Shots::Sampled(1024),
            seed: 0,
            gather: 1,
            options: BTreeMap::new(),
            history: Mutex::new(Vec::new()),
        }
    }

    pub fn backend(mut self, backend: Arc<dyn Backend>) -> Self {
        self.backend = backend;
        self
    }

    pub fn shots(mut self, shots: Shots) -> Self {
        self.shots = shots;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Register size passed to the kernel; defaults to the operator's width.
    pub fn qubits(mut self, n: usize) -> Self {
        self.n_qubits = n.max(1);
        self
    }

    /// Sets an option; unrecognized keys are kept but have no effect.
    pub fn option(mut self, key: &str, value: impl ToString) -> Result<Self, HybridError> {
        let value = value.to_string();
        if key == GATHER_STATISTICS {
            self.gather = value
                .parse::<usize>()
                .ok()
                .filter(|&k| k >= 1)
                .ok_or_else(|| HybridError::ObjectiveEvaluation(format!("{GATHER_STATISTICS} must be a positive integer, got '{value}'")))?;
        }
        self.options.insert(key.to_string(), value);
        Ok(self)
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn operator(&self) -> &PauliOperator {
        &self.operator
    }

    pub fn kernel(&self) -> &KernelHandle {
        &self.kernel
    }

    pub fn options(&self) -> &BTreeMap<String, String> {
        &self.options
    }

    /// Kernel arguments for parameter vector `x`.
    pub fn kernel_args(&self, x: &[f64]) -> Result<Vec<KernelArg>, HybridError> {
        if x.len() != self.n_params {
            return Err(HybridError::ArityMismatch { expected: self.n_params, got: x.len() });
        }
        if let Some(t) = &self.translator {
            return Ok(t(x));
        }
        let params = &self.kernel.signature().params;
        Ok(params
            .iter()
            .map(|p| match (p.ty, self.shape) {
                (ParamType::Qreg, _) => KernelArg::Qreg(self.n_qubits),
                (_, Some(DefaultShape::Real)) => KernelArg::Real(x[0]),
                _ => KernelArg::RealVec(x.to_vec()),
            })
            .collect())
    }

    /// Expectation of the operator at `x`. The sampling seed depends only on the configured
    /// seed and `x`, so repeated evaluation at the same point is reproducible.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64, HybridError> {
        let args = self.kernel_args(x)?;
        let circuit = self.kernel.instantiate(&args).map_err(|e| HybridError::ObjectiveEvaluation(e.to_string()))?;
        let base = point_seed(self.seed, x);
        let mut sum = 0.0;
        for r in 0..self.gather {
            let request = ExecRequest { shots: self.shots, seed: base.wrapping_add((r as u64) << 20) };
            sum += expectation(&self.operator, &circuit, self.n_qubits, self.backend.as_ref(), &request)?;
        }
        let value = sum / self.gather as f64;
        let mut history = self.history.lock().unwrap_or_else(PoisonError::into_inner);
        let iter = history.len();
        history.push(Evaluation { iter, params: x.to_vec(), value });
        Ok(value)
    }

    pub fn history(&self) -> Vec<Evaluation> {
        self.history.lock().unwrap_or_else(PoisonError::into_inner).clone()
    }

    /// Writes the evaluation history as JSON lines.
    pub fn persist_data(&self, path: impl AsRef<Path>) -> Result<(), HybridError> {
        let path = path.as_ref();
        let io = |e: std::io::Error| HybridError::Io(format!("{}: {e}", path.display()));
        let mut file = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
        for e in self.history() {
            let line = serde_json::to_string(&e).map_err(|e| HybridError::Io(e.to_string()))?;
            writeln!(file, "{line}").map_err(io)?;
        }
        file.flush().map_err(io)
    }
}

fn point_seed(seed: u64, x: &[f64]) -> u64 {
    let mix = |mut z: u64| {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    };
    x.iter().fold(mix(seed), |acc, v| mix(acc ^ v.to_bits()))
}

/// `(f(x + h e_i) - f(x - h e_i)) / 2h` for each coordinate.
pub fn central_difference_gradient(
    f: &mut dyn FnMut(&[f64]) -> Result<f64, HybridError>,
    x: &[f64],
    h: f64,
) -> Result<Vec<f64>, HybridError> {
    let mut probe = x.to_vec();
    let mut grad = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        probe[i] = x[i] + h;
        let plus = f(&probe)?;
        probe[i] = x[i] - h;
        let minus = f(&probe)?;
        probe[i] = x[i];
        grad.push((plus - minus) / (2.0 * h));
    }
    Ok(grad)
}

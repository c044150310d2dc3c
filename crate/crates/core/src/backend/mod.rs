//! Execution layer: the backend contract, the statevector simulator, result buffers and
//! backend selector strings.

mod noise;
mod statevector;

use std::collections::BTreeMap;
use std::fmt;
use std::io;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::ir::{Circuit, GateKind, Instruction};

pub use noise::{Depolarizing, NoiseModel, ReadoutError};
pub use statevector::{SimSession, StateVector, StatevectorSimulator, MAX_SIM_QUBITS};

pub const AVAILABLE_BACKENDS: &[&str] = &["sim"];

/// How kernels reach the backend: queued whole circuits, or streamed instruction by
/// instruction with live measurement results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExecutionMode {
    #[default]
    Nisq,
    Ftqc,
}

impl FromStr for ExecutionMode {
    type Err = BackendError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "nisq" => Ok(ExecutionMode::Nisq),
            "ftqc" => Ok(ExecutionMode::Ftqc),
            other => Err(BackendError::UnknownExecutionMode(other.to_string())),
        }
    }
}

impl fmt::Display for ExecutionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExecutionMode::Nisq => "nisq",
            ExecutionMode::Ftqc => "ftqc",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BackendError {
    #[error("qubit q{qubit} out of range for a buffer of {size} qubit(s)")]
    QubitOutOfRange { qubit: usize, size: usize },
    #[error("shots must be at least 1")]
    ZeroShots,
    #[error("cannot allocate a register of zero qubits")]
    ZeroQubits,
    #[error("simulator supports at most {max} qubits, got {got}")]
    TooManyQubits { max: usize, got: usize },
    #[error("buffer has no counts")]
    EmptyCounts,
    #[error("no active streaming session")]
    NoActiveSession,
    #[error("{0} is not a unitary gate")]
    NonUnitary(GateKind),
    #[error("exact (shot-free) execution needs a noiseless circuit with terminal measurements")]
    ExactModeUnsupported,
    #[error("backend {0} does not support streaming execution")]
    StreamingUnsupported(String),
    #[error("invalid noise model: {0}")]
    InvalidNoiseModel(String),
    #[error("unknown backend '{name}'; available: {}", available.join(", "))]
    UnknownBackend { name: String, available: Vec<String> },
    #[error("invalid backend selector '{0}'")]
    InvalidSelector(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Mitigation(#[from] crate::mitigation::MitigationError),
    #[error("unknown execution mode '{0}' (expected nisq or ftqc)")]
    UnknownExecutionMode(String),
}

impl BackendError {
    /// Capacity problems, as opposed to bad user input.
    pub fn is_resource_error(&self) -> bool {
        matches!(self, BackendError::TooManyQubits { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shots {
    /// Exact outcome probabilities instead of samples.
    Exact,
    Sampled(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExecRequest {
    pub shots: Shots,
    pub seed: u64,
}

impl ExecRequest {
    pub fn sampled(shots: usize, seed: u64) -> Self {
        Self { shots: Shots::Sampled(shots), seed }
    }

    pub fn exact() -> Self {
        Self { shots: Shots::Exact, seed: 0 }
    }
}

/// A device or simulator that runs circuits.
pub trait Backend: Send + Sync {
    fn name(&self) -> String;

    /// Batched execution of a whole circuit; results land in `buffer`.
    fn execute(&self, circuit: &Circuit, buffer: &mut QRegBuffer, request: &ExecRequest) -> Result<(), BackendError>;

    /// Starts a streaming session in which instructions apply immediately.
    fn open_session(&self, _n_qubits: usize, _seed: u64) -> Result<Box<dyn Session>, BackendError> {
        Err(BackendError::StreamingUnsupported(self.name()))
    }

    fn noise_model(&self) -> Option<&NoiseModel> {
        None
    }
}

/// Live execution state for feed-forward programs.
pub trait Session: Send {
    fn num_qubits(&self) -> usize;

    /// Applies one instruction; a `Measure` returns its bit and records it in its clbit.
    fn apply(&mut self, inst: &Instruction) -> Result<Option<bool>, BackendError>;

    fn measure(&mut self, qubit: usize) -> Result<bool, BackendError>;

    /// Recorded clbit values.
    fn results(&self) -> &BTreeMap<usize, bool>;

    fn peek_state(&self) -> Option<&StateVector> {
        None
    }
}

impl<B: Backend + ?Sized> Backend for Box<B> {
    fn name(&self) -> String {
        (**self).name()
    }

    fn execute(&self, circuit: &Circuit, buffer: &mut QRegBuffer, request: &ExecRequest) -> Result<(), BackendError> {
        (**self).execute(circuit, buffer, request)
    }

    fn open_session(&self, n_qubits: usize, seed: u64) -> Result<Box<dyn Session>, BackendError> {
        (**self).open_session(n_qubits, seed)
    }

    fn noise_model(&self) -> Option<&NoiseModel> {
        (**self).noise_model()
    }
}

impl<B: Backend + ?Sized> Backend for std::sync::Arc<B> {
    fn name(&self) -> String {
        (**self).name()
    }

    fn execute(&self, circuit: &Circuit, buffer: &mut QRegBuffer, request: &ExecRequest) -> Result<(), BackendError> {
        (**self).execute(circuit, buffer, request)
    }

    fn open_session(&self, n_qubits: usize, seed: u64) -> Result<Box<dyn Session>, BackendError> {
        (**self).open_session(n_qubits, seed)
    }

    fn noise_model(&self) -> Option<&NoiseModel> {
        (**self).noise_model()
    }
}

/// A qubit register plus the results of running on it.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct QRegBuffer {
    name: String,
    size: usize,
    counts: BTreeMap<String, usize>,
    shots: usize,
    distribution: Option<BTreeMap<String, f64>>,
    mitigated_exp_val: Option<f64>,
}

#[derive(Serialize)]
struct CountsJson<'a> {
    counts: &'a BTreeMap<String, usize>,
    shots: usize,
    #[serde(rename = "mitigated_exp_val_z", skip_serializing_if = "Option::is_none")]
    mitigated: Option<f64>,
}

/// Allocates an empty register of `n` qubits.
pub fn qalloc(n: usize) -> Result<QRegBuffer, BackendError> {
    QRegBuffer::new("q", n)
}

impl QRegBuffer {
    pub fn new(name: impl Into<String>, size: usize) -> Result<Self, BackendError> {
        if size == 0 {
            return Err(BackendError::ZeroQubits);
        }
        Ok(Self { name: name.into(), size, ..Default::default() })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Bitstring counts; position i of a key is classical bit i.
    pub fn counts(&self) -> &BTreeMap<String, usize> {
        &self.counts
    }

    pub fn shots(&self) -> usize {
        self.shots
    }

    /// Exact or mitigated outcome probabilities, when the producer supplied them.
    pub fn distribution(&self) -> Option<&BTreeMap<String, f64>> {
        self.distribution.as_ref()
    }

    pub fn set_counts(&mut self, counts: BTreeMap<String, usize>, shots: usize) {
        self.counts = counts;
        self.shots = shots;
        self.distribution = None;
        self.mitigated_exp_val = None;
    }

    pub fn set_distribution(&mut self, dist: BTreeMap<String, f64>) {
        self.distribution = Some(dist);
        self.mitigated_exp_val = None;
    }

    /// Overrides the value returned by [`QRegBuffer::exp_val_z`].
    pub fn set_mitigated_exp_val(&mut self, value: f64) {
        self.mitigated_exp_val = Some(value);
    }

    pub fn mitigated_exp_val(&self) -> Option<f64> {
        self.mitigated_exp_val
    }

    pub fn clear(&mut self) {
        self.set_counts(BTreeMap::new(), 0);
    }

    /// Normalized outcome probabilities from the distribution or the counts.
    pub fn probabilities(&self) -> BTreeMap<String, f64> {
        if let Some(d) = &self.distribution {
            return d.clone();
        }
        let total = self.counts.values().sum::<usize>().max(1) as f64;
        self.counts.iter().map(|(k, &v)| (k.clone(), v as f64 / total)).collect()
    }

    /// Parity expectation Σ p(b)·(−1)^{popcount(b)} over the measured bits.
    pub fn exp_val_z(&self) -> Result<f64, BackendError> {
        if let Some(v) = self.mitigated_exp_val {
            return Ok(v);
        }
        if let Some(d) = &self.distribution {
            if d.is_empty() {
                return Err(BackendError::EmptyCounts);
            }
            return Ok(d.iter().map(|(k, p)| parity(k) * p).sum());
        }
        exp_val_z_of(&self.counts)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&CountsJson { counts: &self.counts, shots: self.shots, mitigated: self.mitigated_exp_val }).expect("counts serialize")
    }

    pub fn print(&self, sink: &mut dyn io::Write) -> io::Result<()> {
        writeln!(sink, "{}", self.to_json())
    }
}

fn parity(bits: &str) -> f64 {
    if bits.bytes().filter(|&b| b == b'1').count() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

pub fn exp_val_z_of(counts: &BTreeMap<String, usize>) -> Result<f64, BackendError> {
    let total: usize = counts.values().sum();
    if total == 0 {
        return Err(BackendError::EmptyCounts);
    }
    Ok(counts.iter().map(|(k, &v)| parity(k) * v as f64).sum::<f64>() / total as f64)
}

pub fn exp_val_z(buffer: &QRegBuffer) -> Result<f64, BackendError> {
    buffer.exp_val_z()
}

/// Parsed `-qpu` value: `sim`, `sim:seed=3,noise-model=n.json` or `sim[noise-model:n.json]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BackendSelector {
    pub name: String,
    pub options: BTreeMap<String, String>,
}

impl BackendSelector {
    pub fn seed(&self) -> Result<Option<u64>, BackendError> {
        self.options
            .get("seed")
            .map(|s| s.parse().map_err(|_| BackendError::InvalidSelector(format!("seed '{s}' is not an integer"))))
            .transpose()
    }

    pub fn noise_model_path(&self) -> Option<&str> {
        self.options.get("noise-model").map(String::as_str)
    }
}

impl FromStr for BackendSelector {
    type Err = BackendError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let text = text.trim();
        let bad = || BackendError::InvalidSelector(text.to_string());
        let (name, body) = if let Some(open) = text.find('[') {
            let inner = text[open + 1..].strip_suffix(']').ok_or_else(bad)?;
            (&text[..open], Some(inner))
        } else if let Some((name, rest)) = text.split_once(':') {
            (name, Some(rest))
        } else {
            (text, None)
        };
        if name.is_empty() {
            return Err(bad());
        }
        let mut options = BTreeMap::new();
        for item in body.unwrap_or("").split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = item.split_once('=').or_else(|| item.split_once(':')).ok_or_else(bad)?;
            options.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Self { name: name.to_string(), options })
    }
}

impl fmt::Display for BackendSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        if !self.options.is_empty() {
            let opts: Vec<String> = self.options.iter().map(|(k, v)| format!("{k}={v}")).collect();
            write!(f, ":{}", opts.join(","))?;
        }
        Ok(())
    }
}

/// Builds the backend a selector names.
pub fn create_backend(selector: &BackendSelector) -> Result<Box<dyn Backend>, BackendError> {
    if selector.name != "sim" {
        return Err(BackendError::UnknownBackend {
            name: selector.name.clone(),
            available: AVAILABLE_BACKENDS.iter().map(|s| s.to_string()).collect(),
        });
    }
    if let Some(k) = selector.options.keys().find(|k| !matches!(k.as_str(), "seed" | "noise-model")) {
        return Err(BackendError::InvalidSelector(format!("unknown option '{k}' for sim")));
    }
    selector.seed()?;
    Ok(match selector.noise_model_path() {
        Some(path) => Box::new(StatevectorSimulator::with_noise(NoiseModel::from_path(path)?)),
        None => Box::new(StatevectorSimulator::new()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(pairs: &[(&str, usize)]) -> BTreeMap<String, usize> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn exp_val_z_examples() {
        assert_eq!(exp_val_z_of(&counts(&[("0", 100)])).unwrap(), 1.0);
        assert_eq!(exp_val_z_of(&counts(&[("1", 100)])).unwrap(), -1.0);
        assert_eq!(exp_val_z_of(&counts(&[("00", 50), ("11", 50)])).unwrap(), 1.0);
        assert_eq!(exp_val_z_of(&BTreeMap::new()), Err(BackendError::EmptyCounts));
    }

    #[test]
    fn qalloc_examples() {
        let q = qalloc(2).unwrap();
        assert_eq!(q.size(), 2);
        assert!(q.counts().is_empty());
        assert_eq!(qalloc(0), Err(BackendError::ZeroQubits));
        assert_eq!(q.exp_val_z(), Err(BackendError::EmptyCounts));
    }

    #[test]
    fn counts_json_shape() {
        let mut q = qalloc(2).unwrap();
        q.set_counts(counts(&[("00", 512), ("11", 512)]), 1024);
        assert_eq!(q.to_json(), r#"{"counts":{"00":512,"11":512},"shots":1024}"#);
    }

    #[test]
    fn selector_spellings() {
        let a: BackendSelector = "sim".parse().unwrap();
        assert!(a.options.is_empty());
        let b: BackendSelector = "sim:seed=3,noise-model=n.json".parse().unwrap();
        let c: BackendSelector = "sim[noise-model:n.json,seed:3]".parse().unwrap();
        assert_eq!(b, c);
        assert_eq!(b.seed().unwrap(), Some(3));
        assert_eq!(b.noise_model_path(), Some("n.json"));
        assert!("sim[seed:3".parse::<BackendSelector>().is_err());
        assert!(matches!(
            create_backend(&"aer".parse().unwrap()),
            Err(BackendError::UnknownBackend { .. })
        ));
        assert!(create_backend(&"sim:seed=x".parse().unwrap()).is_err());
        assert_eq!(create_backend(&a).unwrap().name(), "sim");
    }
}

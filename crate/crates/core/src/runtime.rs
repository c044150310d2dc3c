//! Kernel execution: the queued NISQ pipeline (passes, placement, mitigation, one batched
//! submit) and the streaming FTQC loop.

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use crate::backend::{Backend, BackendError, ExecRequest, ExecutionMode, QRegBuffer, Session, StatevectorSimulator};
use crate::frontend::{FrontendError, KernelArg, KernelHandle, KernelSignature, ParamType, StreamOutcome};
use crate::hybrid::HybridError;
use crate::ir::{Circuit, GateKind};
use crate::mitigation::MitigationChain;
use crate::passes::{OptLevel, PassError, PassManager, PassStats};
use crate::placement::{apply_qubit_map, place, CouplingGraph, PlacementError, PlacementResult, Strategy};

#[derive(Debug, Error)]
pub enum RuntimeError {
    #[error(transparent)]
    Frontend(#[from] FrontendError),
    #[error(transparent)]
    Pass(#[from] PassError),
    #[error(transparent)]
    Placement(#[from] PlacementError),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Hybrid(#[from] HybridError),
}

impl RuntimeError {
    /// Capacity limits of the device or simulator, as opposed to bad input.
    pub fn is_resource_error(&self) -> bool {
        match self {
            RuntimeError::Backend(e) | RuntimeError::Frontend(FrontendError::Backend(e)) => e.is_resource_error(),
            RuntimeError::Hybrid(HybridError::Backend(e)) => e.is_resource_error(),
            RuntimeError::Placement(PlacementError::GraphTooSmall { .. }) => true,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Optimization {
    Level(OptLevel),
    /// Explicit pass names, run in order.
    Passes(Vec<String>),
}

impl Default for Optimization {
    fn default() -> Self {
        Optimization::Level(OptLevel::O0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    pub graph: CouplingGraph,
    pub strategy: Strategy,
}

/// Compilation steps applied to an instantiated circuit before it is submitted.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Pipeline {
    pub optimization: Optimization,
    pub placement: Option<Placement>,
    /// Manual logical-to-physical map; with a placement it becomes the starting layout.
    pub qubit_map: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Compiled {
    pub circuit: Circuit,
    pub pass_stats: Vec<PassStats>,
    pub placement: Option<PlacementResult>,
}

impl Pipeline {
    pub fn compile(&self, circuit: &Circuit, passes: &PassManager) -> Result<Compiled, RuntimeError> {
        let (optimized, pass_stats) = match &self.optimization {
            Optimization::Level(level) => passes.run_level(*level, circuit)?,
            Optimization::Passes(names) => passes.run_sequence(names, circuit)?,
        };
        let (circuit, placement) = match (&self.placement, &self.qubit_map) {
            (Some(p), map) => {
                let r = place(&optimized, &p.graph, p.strategy, map.as_deref())?;
                (r.circuit.clone(), Some(r))
            }
            (None, Some(map)) => (apply_qubit_map(&optimized, map)?, None),
            (None, None) => (optimized, None),
        };
        Ok(Compiled { circuit, pass_stats, placement })
    }
}

/// Pins every measurement's classical bit and renumbers the used qubits densely, preserving
/// their order. Returns the circuit and its width.
fn compact(circuit: &Circuit) -> (Circuit, usize) {
    let insts = circuit.flatten();
    let mut used: Vec<usize> = insts.iter().flat_map(|i| i.qubits.iter().copied()).collect();
    used.sort_unstable();
    used.dedup();
    let index: BTreeMap<usize, usize> = used.iter().enumerate().map(|(k, &q)| (q, k)).collect();
    let out = insts.into_iter().map(|i| {
        let mut o = i.map_qubits(|q| index[&q]);
        if i.kind == GateKind::Measure {
            o.clbit = Some(i.clbit.unwrap_or(i.qubits[0]));
        }
        o
    });
    (Circuit::from_instructions(circuit.name.clone(), out), used.len())
}

/// Fills the kernel's register parameters with `qubits` and its classical parameters, in
/// order, from `classical`.
pub fn bind_args(signature: &KernelSignature, qubits: usize, classical: &[KernelArg]) -> Result<Vec<KernelArg>, FrontendError> {
    let expected = signature.classical_params().count();
    if expected != classical.len() {
        return Err(FrontendError::ArgumentMismatch {
            kernel: signature.name.clone(),
            message: format!("expected {expected} classical argument(s), got {}", classical.len()),
        });
    }
    let mut rest = classical.iter();
    Ok(signature
        .params
        .iter()
        .map(|p| match p.ty {
            ParamType::Qreg => KernelArg::Qreg(qubits),
            _ => rest.next().expect("counted above").clone(),
        })
        .collect())
}

/// Parses comma-separated literals by the kernel's classical parameter types. Vector
/// parameters take `[a;b;c]` or a single bare value.
pub fn parse_args(signature: &KernelSignature, text: &str) -> Result<Vec<KernelArg>, FrontendError> {
    let bad = |m: String| FrontendError::ArgumentMismatch { kernel: signature.name.clone(), message: m };
    let items: Vec<&str> = if text.trim().is_empty() { Vec::new() } else { text.split(',').map(str::trim).collect() };
    let params: Vec<_> = signature.classical_params().collect();
    if items.len() != params.len() {
        return Err(bad(format!("expected {} argument(s), got {}", params.len(), items.len())));
    }
    let real = |s: &str| s.parse::<f64>().map_err(|_| bad(format!("'{s}' is not a number")));
    let int = |s: &str| s.parse::<i64>().map_err(|_| bad(format!("'{s}' is not an integer")));
    let list = |s: &str| -> Vec<String> {
        let inner = s.strip_prefix('[').and_then(|s| s.strip_suffix(']')).unwrap_or(s);
        inner.split(';').map(|x| x.trim().to_string()).filter(|x| !x.is_empty()).collect()
    };
    params
        .iter()
        .zip(items)
        .map(|(p, s)| match p.ty {
            ParamType::Real => real(s).map(KernelArg::Real),
            ParamType::Int => int(s).map(KernelArg::Int),
            ParamType::RealVector => list(s).iter().map(|x| real(x)).collect::<Result<_, _>>().map(KernelArg::RealVec),
            ParamType::IntVector => list(s).iter().map(|x| int(x)).collect::<Result<_, _>>().map(KernelArg::IntVec),
            ParamType::Qreg => unreachable!("classical parameters only"),
        })
        .collect()
}

/// Executes kernels on a backend in NISQ or FTQC mode.
#[derive(Clone)]
pub struct QuantumRuntime {
    backend: Arc<dyn Backend>,
    mode: ExecutionMode,
    shots: usize,
    seed: u64,
    pipeline: Pipeline,
    passes: PassManager,
}

impl std::fmt::Debug for QuantumRuntime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("QuantumRuntime")
            .field("backend", &self.backend.name())
            .field("mode", &self.mode)
            .field("shots", &self.shots)
            .field("seed", &self.seed)
            .field("pipeline", &self.pipeline)
            .finish()
    }
}

impl Default for QuantumRuntime {
    fn default() -> Self {
        Self::new(Arc::new(StatevectorSimulator::new()))
    }
}

impl QuantumRuntime {
    pub fn new(backend: Arc<dyn Backend>) -> Self {
        Self { backend, mode: ExecutionMode::Nisq, shots: 1024, seed: 0, pipeline: Pipeline::default(), passes: PassManager::new() }
    }

    pub fn mode(mut self, mode: ExecutionMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn shots(mut self, shots: usize) -> Self {
        self.shots = shots;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn pipeline(mut self, pipeline: Pipeline) -> Self {
        self.pipeline = pipeline;
        self
    }

    pub fn pass_manager(mut self, passes: PassManager) -> Self {
        self.passes = passes;
        self
    }

    /// Wraps the current backend in the chain's decorators.
    pub fn mitigation(mut self, chain: &MitigationChain) -> Self {
        self.backend = chain.wrap(self.backend);
        self
    }

    pub fn backend(&self) -> &Arc<dyn Backend> {
        &self.backend
    }

    pub fn execution_mode(&self) -> ExecutionMode {
        self.mode
    }

    pub fn compile(&self, circuit: &Circuit) -> Result<Compiled, RuntimeError> {
        self.pipeline.compile(circuit, &self.passes)
    }

    /// Runs only the optimization passes, leaving qubits logical.
    pub fn compile_without_placement(&self, circuit: &Circuit) -> Result<Circuit, RuntimeError> {
        let logical = Pipeline { placement: None, qubit_map: None, ..self.pipeline.clone() };
        Ok(logical.compile(circuit, &self.passes)?.circuit)
    }

    /// Compiles `circuit` and flushes it to the backend in one batched execution.
    pub fn submit(&self, circuit: &Circuit, buffer: &mut QRegBuffer) -> Result<Compiled, RuntimeError> {
        if self.shots == 0 {
            return Err(BackendError::ZeroShots.into());
        }
        let compiled = self.compile(circuit)?;
        let request = ExecRequest::sampled(self.shots, self.seed);
        if compiled.circuit.num_qubits() <= buffer.size() {
            self.backend.execute(&compiled.circuit, buffer, &request)?;
        } else {
            // Placed onto a device wider than the register: simulate only the touched qubits.
            let (dense, width) = compact(&compiled.circuit);
            let mut scratch = QRegBuffer::new(buffer.name().to_string(), width)?;
            self.backend.execute(&dense, &mut scratch, &request)?;
            copy_results(&scratch, buffer);
        }
        Ok(compiled)
    }

    /// Runs `kernel` on `buffer`. Register parameters receive the buffer; `classical` fills
    /// the remaining parameters in order.
    pub fn invoke(&self, kernel: &KernelHandle, buffer: &mut QRegBuffer, classical: &[KernelArg]) -> Result<(), RuntimeError> {
        let args = bind_args(kernel.signature(), buffer.size(), classical)?;
        match self.mode {
            ExecutionMode::Nisq => {
                let circuit = kernel.instantiate(&args)?;
                self.submit(&circuit, buffer)?;
            }
            ExecutionMode::Ftqc => {
                if self.shots == 0 {
                    return Err(BackendError::ZeroShots.into());
                }
                let mut counts = BTreeMap::new();
                for shot in 0..self.shots {
                    let (_, session) = self.stream_args(kernel, &args, buffer.size(), self.seed.wrapping_add(shot as u64))?;
                    let key: String = session.results().values().map(|&b| if b { '1' } else { '0' }).collect();
                    *counts.entry(key).or_insert(0) += 1;
                }
                buffer.set_counts(counts, self.shots);
            }
        }
        Ok(())
    }

    /// One streamed execution with live feed-forward. The returned session holds the final
    /// state and measurement record.
    pub fn stream(
        &self,
        kernel: &KernelHandle,
        qubits: usize,
        classical: &[KernelArg],
        seed: u64,
    ) -> Result<(StreamOutcome, Box<dyn Session>), RuntimeError> {
        let args = bind_args(kernel.signature(), qubits, classical)?;
        self.stream_args(kernel, &args, qubits, seed)
    }

    fn stream_args(
        &self,
        kernel: &KernelHandle,
        args: &[KernelArg],
        qubits: usize,
        seed: u64,
    ) -> Result<(StreamOutcome, Box<dyn Session>), RuntimeError> {
        let mut session = self.backend.open_session(qubits, seed)?;
        let outcome = kernel.stream(args, session.as_mut())?;
        Ok((outcome, session))
    }
}

fn copy_results(from: &QRegBuffer, to: &mut QRegBuffer) {
    to.clear();
    to.set_counts(from.counts().clone(), from.shots());
    if let Some(d) = from.distribution() {
        to.set_distribution(d.clone());
    }
    if let Some(v) = from.mitigated_exp_val() {
        to.set_mitigated_exp_val(v);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::KernelRegistry;
    use crate::placement::verify;

    fn registry(src: &str) -> KernelRegistry {
        let r = KernelRegistry::new();
        r.jit_compile(src).unwrap();
        r
    }

    const GHZ: &str = "__qpu__ void ghz(qreg q) { H(q[0]); for (int i = 0; i < q.size() - 1; i++) { CX(q[i], q[i + 1]); } for (int i = 0; i < q.size(); i++) { Measure(q[i]); } }";

    #[test]
    fn nisq_bell() {
        let r = registry("__qpu__ void bell(qreg q) { H(q[0]); CX(q[0], q[1]); Measure(q[0]); Measure(q[1]); }");
        let mut buf = QRegBuffer::new("q", 2).unwrap();
        QuantumRuntime::default().seed(5).invoke(&r.get_kernel("bell").unwrap(), &mut buf, &[]).unwrap();
        assert!(buf.counts().keys().all(|k| k == "00" || k == "11"));
        assert_eq!(buf.shots(), 1024);
    }

    #[test]
    fn placement_on_wide_device_is_compacted() {
        let r = registry(GHZ);
        let pipeline = Pipeline {
            placement: Some(Placement { graph: CouplingGraph::builtin("falcon27").unwrap(), strategy: Strategy::Sabre }),
            ..Pipeline::default()
        };
        let rt = QuantumRuntime::default().pipeline(pipeline).seed(2);
        let kernel = r.get_kernel("ghz").unwrap();
        let mut buf = QRegBuffer::new("q", 5).unwrap();
        rt.invoke(&kernel, &mut buf, &[]).unwrap();
        assert!(buf.counts().keys().all(|k| k == "00000" || k == "11111"), "{:?}", buf.counts());
        let compiled = rt.compile(&kernel.instantiate(&[KernelArg::Qreg(5)]).unwrap()).unwrap();
        verify(&compiled.circuit, &CouplingGraph::builtin("falcon27").unwrap()).unwrap();
    }

    #[test]
    fn ftqc_counts_match_nisq() {
        let r = registry("__qpu__ void b(qreg q) { H(q[0]); CX(q[0], q[1]); Measure(q[0]); Measure(q[1]); }");
        let k = r.get_kernel("b").unwrap();
        let mut buf = QRegBuffer::new("q", 2).unwrap();
        QuantumRuntime::default().mode(ExecutionMode::Ftqc).shots(400).invoke(&k, &mut buf, &[]).unwrap();
        assert_eq!(buf.counts().values().sum::<usize>(), 400);
        assert!(buf.counts().keys().all(|k| k == "00" || k == "11"));
    }

    #[test]
    fn args_parse_by_signature() {
        let r = registry("__qpu__ void k(qreg q, double t, int n, std::vector<double> v) { Rx(q[0], t); }");
        let sig = r.get_kernel("k").unwrap().signature().clone();
        let args = parse_args(&sig, "0.5, 3, [1;2.5]").unwrap();
        assert_eq!(args, vec![KernelArg::Real(0.5), KernelArg::Int(3), KernelArg::RealVec(vec![1.0, 2.5])]);
        assert!(parse_args(&sig, "0.5").is_err());
        assert!(parse_args(&sig, "x, 3, 1").is_err());
        assert_eq!(bind_args(&sig, 2, &args).unwrap()[0], KernelArg::Qreg(2));
    }

    #[test]
    fn resource_errors_classified() {
        let r = registry(GHZ);
        let mut buf = QRegBuffer::new("q", 25).unwrap();
        let e = QuantumRuntime::default().invoke(&r.get_kernel("ghz").unwrap(), &mut buf, &[]).unwrap_err();
        assert!(e.is_resource_error(), "{e}");
        let pipeline = Pipeline {
            placement: Some(Placement { graph: CouplingGraph::builtin("vigo").unwrap(), strategy: Strategy::Ssp }),
            ..Pipeline::default()
        };
        let mut buf = QRegBuffer::new("q", 6).unwrap();
        let e = QuantumRuntime::default().pipeline(pipeline).invoke(&r.get_kernel("ghz").unwrap(), &mut buf, &[]).unwrap_err();
        assert!(e.is_resource_error());
    }
}

//! The `qkc` command-line driver.
//!
//! ```text
//! qkc run bell.qk -qpu sim -shots 1024
//! qkc compile ghz.qk --qubits 5 --placement sabre --coupling-graph vigo
//! qkc run noisy_zero.qk -qpu sim:noise-model=noise.json -em zne --observable Z0
//! ```
//!
//! The single-dash long flags `-qpu -shots -opt -opt-pass -qubit-map -em -qrt` are accepted
//! alongside their `--` forms.

use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use crate::backend::{create_backend, BackendSelector, ExecRequest, ExecutionMode, QRegBuffer, AVAILABLE_BACKENDS, MAX_SIM_QUBITS};
use crate::frontend::{FrontendError, KernelArg, KernelHandle, KernelRegistry, KernelSignature, ParamType};
use crate::hybrid::{expectation, PauliOperator};
use crate::ir::print_circuit;
use crate::mitigation::MitigationChain;
use crate::passes::{stats_report, OptLevel, PassManager};
use crate::placement::{parse_qubit_map, CouplingGraph, Strategy};
use crate::runtime::{parse_args, Optimization, Pipeline, Placement, QuantumRuntime, RuntimeError};

const SINGLE_DASH_FLAGS: &[&str] = &["-qpu", "-shots", "-opt", "-opt-pass", "-qubit-map", "-em", "-qrt"];

/// Kernel parameter filled by `--inject-x`.
const INJECT_PARAM: &str = "inject_x";

#[derive(Parser, Debug)]
#[command(name = "qkc", version, about = "Compile and run quantum kernels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Instantiate, optimize and place a kernel, then print the circuit.
    Compile {
        #[command(flatten)]
        config: RunConfig,
        /// Write pass statistics JSON to this path (`-` for stderr, keeping stdout reproducible).
        #[arg(long = "emit-pass-stats", value_name = "PATH")]
        emit_pass_stats: Option<String>,
    },
    /// Compile and execute a kernel, printing counts JSON.
    Run {
        #[command(flatten)]
        config: RunConfig,
        /// Print the expectation of this Pauli operator instead of counts.
        #[arg(long)]
        observable: Option<String>,
    },
    /// List optimization passes.
    Passes,
    /// List backends.
    Backends,
    /// List placement strategies.
    Placements,
}

#[derive(Args, Debug)]
struct RunConfig {
    /// Kernel sources (.qk) or OpenQASM programs (.qasm).
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long, default_value = "sim")]
    qpu: String,
    #[arg(long, default_value_t = 1024)]
    shots: usize,
    #[arg(long, default_value_t = 0)]
    opt: u8,
    /// Pass to run; repeat for an ordered list. Overrides --opt.
    #[arg(long = "opt-pass")]
    opt_pass: Vec<String>,
    /// Placement strategy: ssp (swap-shortest-path) or sabre.
    #[arg(long)]
    placement: Option<String>,
    /// Built-in graph name or coupling-graph JSON path.
    #[arg(long = "coupling-graph")]
    coupling_graph: Option<String>,
    /// Logical-to-physical map, e.g. `5,6`.
    #[arg(long = "qubit-map")]
    qubit_map: Option<String>,
    /// Error-mitigation decorators, innermost first.
    #[arg(long = "em", value_delimiter = ',')]
    em: Vec<String>,
    /// Runtime: nisq or ftqc.
    #[arg(long, default_value = "nisq")]
    qrt: String,
    /// Entry kernel; defaults to the last kernel of the last input.
    #[arg(long)]
    entry: Option<String>,
    /// Comma-separated classical arguments for the entry kernel.
    #[arg(long, default_value = "", allow_hyphen_values = true)]
    args: String,
    /// Register size; inferred when the kernel does not depend on it.
    #[arg(long)]
    qubits: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Flip this data qubit, through the entry kernel's `inject_x` parameter.
    #[arg(long = "inject-x", allow_hyphen_values = true)]
    inject_x: Option<i64>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Runtime(RuntimeError),
}

impl<E: Into<RuntimeError>> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Runtime(e.into())
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Runtime(e) if e.is_resource_error() => 2,
            _ => 1,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Usage(m) => m.clone(),
            CliError::Runtime(e) => e.to_string(),
        }
    }
}

/// Rewrites the single-dash long flags to their `--` spelling.
pub fn normalize_args<I: IntoIterator<Item = String>>(args: I) -> Vec<String> {
    args.into_iter()
        .map(|a| {
            let (flag, value) = match a.split_once('=') {
                Some((f, v)) => (f, Some(v)),
                None => (a.as_str(), None),
            };
            if SINGLE_DASH_FLAGS.contains(&flag) {
                match value {
                    Some(v) => format!("-{flag}={v}"),
                    None => format!("-{flag}"),
                }
            } else {
                a
            }
        })
        .collect()
}

/// Runs the driver on `args` (including the program name) and returns the exit code.
pub fn main_with<I: IntoIterator<Item = String>>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(normalize_args(args)) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message());
            e.exit_code()
        }
    }
}

pub fn main_from_env() -> i32 {
    main_with(std::env::args(), &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Usage(e.to_string());
    match command {
        Command::Passes => {
            for name in PassManager::new().names() {
                writeln!(out, "{name}").map_err(io)?;
            }
        }
        Command::Backends => {
            for name in AVAILABLE_BACKENDS {
                writeln!(out, "{name}").map_err(io)?;
            }
        }
        Command::Placements => {
            writeln!(out, "ssp\nsabre").map_err(io)?;
        }
        Command::Compile { config, emit_pass_stats } => {
            let job = Job::prepare(&config)?;
            let circuit = job.kernel.instantiate(&job.args)?;
            let compiled = job.runtime.compile(&circuit)?;
            print_circuit(&compiled.circuit, out).map_err(io)?;
            if let Some(target) = emit_pass_stats {
                let report = stats_report(&compiled.pass_stats);
                if target == "-" {
                    writeln!(err, "{report}").map_err(io)?;
                } else {
                    std::fs::write(&target, report + "\n").map_err(|e| CliError::Usage(format!("{target}: {e}")))?;
                }
            }
        }
        Command::Run { config, observable } => {
            let job = Job::prepare(&config)?;
            match observable {
                Some(text) => {
                    if job.runtime.execution_mode() == ExecutionMode::Ftqc {
                        return Err(CliError::Usage("--observable needs the nisq runtime".into()));
                    }
                    let op = PauliOperator::parse(&text)?;
                    let circuit = job.kernel.instantiate(&job.args)?;
                    let optimized = job.runtime.compile_without_placement(&circuit)?;
                    let width = job.qubits.max(op.num_qubits());
                    let request = ExecRequest::sampled(config.shots, job.seed);
                    let value = expectation(&op, &optimized, width, job.runtime.backend().as_ref(), &request)?;
                    writeln!(out, "{}", serde_json::json!({ "observable": op.to_string(), "expectation": value })).map_err(io)?;
                }
                None => {
                    let mut buffer = QRegBuffer::new("q", job.qubits)?;
                    job.runtime.invoke(&job.kernel, &mut buffer, &job.classical)?;
                    writeln!(out, "{}", buffer.to_json()).map_err(io)?;
                }
            }
        }
    }
    Ok(())
}

/// Everything a compile or run needs, resolved from the flags.
struct Job {
    kernel: KernelHandle,
    classical: Vec<KernelArg>,
    args: Vec<KernelArg>,
    qubits: usize,
    seed: u64,
    runtime: QuantumRuntime,
}

impl Job {
    fn prepare(config: &RunConfig) -> Result<Self, CliError> {
        let registry = KernelRegistry::new();
        let mut last = None;
        for path in &config.inputs {
            let names = registry.load_file(path)?;
            last = names.last().cloned().or(last);
        }
        let entry = config.entry.clone().or(last).ok_or_else(|| CliError::Usage("inputs define no kernels".into()))?;
        let kernel = registry.get_kernel(&entry)?;
        let classical = classical_args(kernel.signature(), &config.args, config.inject_x)?;

        let selector: BackendSelector = config.qpu.parse()?;
        let seed = match config.seed {
            Some(s) => s,
            None => selector.seed()?.unwrap_or(0),
        };
        let backend: Arc<dyn crate::backend::Backend> = Arc::from(create_backend(&selector)?);
        let mode: ExecutionMode = config.qrt.parse()?;
        let pipeline = pipeline(config)?;
        if mode == ExecutionMode::Ftqc && (pipeline.placement.is_some() || pipeline.qubit_map.is_some()) {
            return Err(CliError::Usage("placement applies to the nisq runtime only".into()));
        }
        let chain = MitigationChain::parse(&config.em).map_err(crate::backend::BackendError::from)?;
        let runtime = QuantumRuntime::new(backend).mode(mode).shots(config.shots).seed(seed).pipeline(pipeline).mitigation(&chain);

        let qubits = match config.qubits.or(kernel.def().declared_qubits) {
            Some(n) => n,
            None => infer_width(&kernel, &classical)?,
        };
        let args = crate::runtime::bind_args(kernel.signature(), qubits, &classical)?;
        Ok(Self { kernel, classical, args, qubits, seed, runtime })
    }
}

fn pipeline(config: &RunConfig) -> Result<Pipeline, CliError> {
    let optimization = if config.opt_pass.is_empty() {
        Optimization::Level(OptLevel::new(config.opt)?)
    } else {
        Optimization::Passes(config.opt_pass.clone())
    };
    let placement = match (&config.placement, &config.coupling_graph) {
        (None, None) => None,
        (strategy, graph) => {
            let graph = graph.as_deref().ok_or_else(|| CliError::Usage("--placement needs --coupling-graph".into()))?;
            let strategy: Strategy = strategy.as_deref().unwrap_or("ssp").parse()?;
            Some(Placement { graph: CouplingGraph::load(graph)?, strategy })
        }
    };
    let qubit_map = config.qubit_map.as_deref().map(parse_qubit_map).transpose()?;
    Ok(Pipeline { optimization, placement, qubit_map })
}

/// Classical arguments from `--args`, with `--inject-x` supplying the `inject_x` parameter
/// (default -1).
fn classical_args(signature: &KernelSignature, text: &str, inject_x: Option<i64>) -> Result<Vec<KernelArg>, CliError> {
    let has_inject = signature.params.iter().any(|p| p.name == INJECT_PARAM && p.ty == ParamType::Int);
    if inject_x.is_some() && !has_inject {
        return Err(CliError::Usage(format!("--inject-x needs an int parameter named {INJECT_PARAM} on kernel {}", signature.name)));
    }
    let mut rest = signature.clone();
    rest.params.retain(|p| !(has_inject && p.name == INJECT_PARAM));
    let mut given = parse_args(&rest, text)?.into_iter();
    Ok(signature
        .classical_params()
        .map(|p| {
            if has_inject && p.name == INJECT_PARAM {
                KernelArg::Int(inject_x.unwrap_or(-1))
            } else {
                given.next().expect("parsed by signature")
            }
        })
        .collect())
}

/// Width of the circuit the kernel builds on the largest register; fails when the kernel
/// fills whatever register it gets.
fn infer_width(kernel: &KernelHandle, classical: &[KernelArg]) -> Result<usize, CliError> {
    let probe = crate::runtime::bind_args(kernel.signature(), MAX_SIM_QUBITS, classical)?;
    let width = match kernel.instantiate(&probe) {
        Ok(c) => c.num_qubits(),
        Err(FrontendError::MeasurementDependentBranchInNisqMode { .. }) => MAX_SIM_QUBITS,
        Err(e) => return Err(e.into()),
    };
    if width == 0 || width >= MAX_SIM_QUBITS {
        return Err(CliError::Usage(format!("cannot infer the register size of kernel {}; pass --qubits", kernel.name())));
    }
    Ok(width)
}

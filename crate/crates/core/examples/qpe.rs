//! Phase estimation of the T gate with three counting qubits. Every shot reads "100".

use std::path::Path;

use qk::backend::qalloc;
use qk::frontend::{KernelArg, KernelRegistry};
use qk::runtime::QuantumRuntime;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let registry = KernelRegistry::new();
    registry.load_file(Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/kernels/qpe.qk")))?;

    let circuit = registry.instantiate("QuantumPhaseEstimation", &[KernelArg::Qreg(4)])?;
    println!("{} instructions after expansion", circuit.flatten().len());

    let mut q = qalloc(4)?;
    registry.invoke("QuantumPhaseEstimation", &mut q, &[], &QuantumRuntime::default())?;
    q.print(&mut std::io::stdout())?;
    Ok(())
}

//! Zero-noise extrapolation on 100 noisy X gates.

use std::path::Path;
use std::sync::Arc;

use qk::backend::{qalloc, NoiseModel, StatevectorSimulator};
use qk::frontend::KernelRegistry;
use qk::mitigation::MitigationChain;
use qk::runtime::QuantumRuntime;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let registry = KernelRegistry::new();
    registry.load_file(Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/kernels/noisy_zero.qk")))?;
    let noisy = Arc::new(StatevectorSimulator::with_noise(NoiseModel::depolarizing(0.001, 0.01)));

    let raw = QuantumRuntime::new(noisy.clone()).shots(4096).seed(3);
    let mut q = qalloc(1)?;
    registry.invoke("noisy_zero", &mut q, &[], &raw)?;
    println!("Expectation: {:.6}", q.exp_val_z()?);

    let mitigated = raw.clone().mitigation(&MitigationChain::parse(&["zne"])?);
    let mut q = qalloc(1)?;
    registry.invoke("noisy_zero", &mut q, &[], &mitigated)?;
    println!("Expectation (zne): {:.6}", q.exp_val_z()?);
    Ok(())
}

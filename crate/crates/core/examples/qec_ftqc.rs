//! Bit-flip code on the streaming runtime: measurement results steer the correction.

use std::path::Path;

use qk::backend::ExecutionMode;
use qk::frontend::{KernelArg, KernelRegistry};
use qk::runtime::QuantumRuntime;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let registry = KernelRegistry::new();
    registry.load_file(Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/kernels/qec.qk")))?;
    let kernel = registry.get_kernel("qec_cycle")?;
    let runtime = QuantumRuntime::default().mode(ExecutionMode::Ftqc);

    println!("error  parity01 parity12  data after correction");
    for inject in [-1i64, 0, 1, 2] {
        let (outcome, session) = runtime.stream(&kernel, 4, &[KernelArg::Real(0.0), KernelArg::Int(inject)], 7)?;
        let parities: Vec<u8> = outcome.measurements.iter().map(|&(_, b)| b as u8).collect();
        let state = session.peek_state().expect("simulator sessions expose their state");
        let basis = state.amplitudes().iter().position(|a| a.norm() > 0.5).unwrap_or(0);
        let label = if inject < 0 { "none".to_string() } else { format!("X{inject}") };
        println!("{label:<6} {:>8} {:>8}  {:03b}", parities[0], parities[1], basis & 0b111);
    }
    Ok(())
}

//! Toffoli synthesized from its 8x8 matrix; prints the truth table.

use std::path::Path;

use qk::backend::qalloc;
use qk::frontend::{KernelArg, KernelRegistry};
use qk::runtime::QuantumRuntime;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let registry = KernelRegistry::new();
    registry.load_file(Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/kernels/ccnot.qk")))?;
    let runtime = QuantumRuntime::default().shots(256);

    for config in 0..8 {
        let bits: Vec<i64> = (0..3).map(|i| config >> (2 - i) & 1).collect();
        let mut q = qalloc(3)?;
        registry.invoke("ccnot", &mut q, &[KernelArg::IntVec(bits.clone())], &runtime)?;
        let input: String = bits.iter().map(|b| b.to_string()).collect();
        let outputs: Vec<&String> = q.counts().keys().collect();
        println!("{input} -> {}", outputs.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(","));
    }
    Ok(())
}

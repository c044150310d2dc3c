//! Compile a kernel file and run it on the simulator.

use std::path::Path;

use qk::backend::qalloc;
use qk::frontend::KernelRegistry;
use qk::runtime::QuantumRuntime;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let registry = KernelRegistry::new();
    registry.load_file(Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/kernels/bell.qk")))?;

    let mut q = qalloc(2)?;
    registry.invoke("bell", &mut q, &[], &QuantumRuntime::default().shots(1024))?;
    q.print(&mut std::io::stdout())?;
    Ok(())
}

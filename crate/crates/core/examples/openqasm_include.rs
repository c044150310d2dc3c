//! A kernel whose body is an included OpenQASM file, and a standalone .qasm program.

use std::path::Path;

use qk::frontend::{KernelArg, KernelRegistry};
use qk::ir::print_circuit;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/kernels"));
    let registry = KernelRegistry::new();
    registry.load_file(&dir.join("grover.qk"))?;
    registry.load_file(&dir.join("ghz3.qasm"))?;

    print_circuit(&registry.instantiate("grover", &[KernelArg::Qreg(3)])?, &mut std::io::stdout())?;
    println!();
    print_circuit(&registry.instantiate("ghz3", &[KernelArg::Qreg(3)])?, &mut std::io::stdout())?;
    Ok(())
}

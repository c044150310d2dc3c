//! Kernels compiled from a string at run time, called by handle and by name.

use qk::backend::qalloc;
use qk::frontend::{KernelArg, KernelRegistry};
use qk::runtime::QuantumRuntime;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let kernel_src = r#"
        __qpu__ void bell(qreg q) {
            using qcor::openqasm;
            h q[0];
            cx q[0], q[1];
            creg c[2];
            measure q -> c;
        }"#;
    let qjit = KernelRegistry::new();
    qjit.jit_compile(kernel_src)?;
    qjit.jit_compile(kernel_src)?;
    println!("compiled {} time(s)", qjit.compile_count());

    let runtime = QuantumRuntime::default();
    let bell = qjit.get_kernel("bell")?;
    let mut q = qalloc(2)?;
    runtime.invoke(&bell, &mut q, &[])?;
    q.print(&mut std::io::stdout())?;

    let mut r = qalloc(2)?;
    qjit.invoke("bell", &mut r, &[], &runtime.clone().seed(1))?;
    r.print(&mut std::io::stdout())?;

    println!("{} instructions", bell.instantiate(&[KernelArg::Qreg(2)])?.flatten().len());
    Ok(())
}

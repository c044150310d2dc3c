//! Energy along one parameter of the exponential ansatz, ten sampled runs per point.

use std::path::Path;

use qk::backend::Shots;
use qk::frontend::KernelRegistry;
use qk::hybrid::{ObjectiveFunction, GATHER_STATISTICS, X, Y, Z};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let registry = KernelRegistry::new();
    registry.load_file(Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/kernels/deuteron.qk")))?;
    let h = 5.907 - 2.1433 * X(0) * X(1) - 2.1433 * Y(0) * Y(1) + 0.21829 * Z(0) - 6.125 * Z(1);

    let vqe = ObjectiveFunction::new(registry.get_kernel("ansatz_exp")?, h, 1)?
        .shots(Shots::Sampled(1024))
        .seed(42)
        .option(GATHER_STATISTICS, 10)?;
    for k in 0..20 {
        let x = -1.0 + 2.0 * k as f64 / 19.0;
        println!("{k}, {x:.4}, {:.5}", vqe.evaluate(&[x])?);
    }
    let out = std::env::temp_dir().join("param_sweep_data.json");
    vqe.persist_data(&out)?;
    println!("history written to {}", out.display());
    Ok(())
}

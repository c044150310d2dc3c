//! Deuteron ground-state energy by VQE, synchronously and as a background task.

use std::path::Path;
use std::sync::Arc;

use qk::backend::Shots;
use qk::frontend::KernelRegistry;
use qk::hybrid::{create_optimizer, optimize, sync, task_initiate, ObjectiveFunction, PauliOperator, X, Y, Z};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let registry = KernelRegistry::new();
    registry.load_file(Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/kernels/deuteron.qk")))?;

    let h = 5.907 - 2.1433 * X(0) * X(1) - 2.1433 * Y(0) * Y(1) + 0.21829 * Z(0) - 6.125 * Z(1);
    let ansatz = registry.get_kernel("ansatz")?;
    let objective = |h: PauliOperator| ObjectiveFunction::new(ansatz.clone(), h, 1).map(|o| o.shots(Shots::Exact));

    let nm = create_optimizer("nelder-mead")?;
    let direct = optimize(nm.as_ref(), &objective(h.clone())?)?;
    println!("nelder-mead: <H> = {:.6} at theta = {:.6}", direct.opt_val, direct.opt_params[0]);

    let handle = task_initiate(Arc::new(objective(h.clone())?), create_optimizer("adam")?);
    // The optimization runs on its own thread until sync.
    let results = sync(&handle)?;
    println!("adam (task): <H> = {:.6} at theta = {:.6}", results.opt_val, results.opt_params[0]);
    Ok(())
}

//! Level-1 optimization of a redundant circuit, with per-pass statistics.

use std::path::Path;

use qk::frontend::{KernelArg, KernelRegistry};
use qk::ir::{print_circuit, to_unitary, Circuit, GateKind};
use qk::passes::{stats_report, OptLevel, PassManager};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let registry = KernelRegistry::new();
    registry.load_file(Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/kernels/cancellation.qk")))?;
    let circuit = registry.instantiate("cancellation", &[KernelArg::Qreg(3)])?;

    let pm = PassManager::new();
    let (optimized, stats) = pm.run_level(OptLevel::O1, &circuit)?;
    print_circuit(&optimized, &mut std::io::stdout())?;
    println!("{}", stats_report(&stats));

    let unitary_part = |c: &Circuit| Circuit::from_instructions("u", c.flatten().into_iter().filter(|i| i.kind != GateKind::Measure));
    let same = to_unitary(&unitary_part(&circuit), 3)?.approx_eq_up_to_phase(&to_unitary(&unitary_part(&optimized), 3)?, 1e-9);
    println!("{} -> {} gates, unitary preserved: {same}", circuit.flatten().len(), optimized.flatten().len());
    Ok(())
}

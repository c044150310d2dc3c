//! GHZ on a five-qubit device: placed listings for both routers, then a placed run.

use std::path::Path;

use qk::backend::qalloc;
use qk::frontend::{KernelArg, KernelRegistry};
use qk::ir::print_circuit;
use qk::placement::{place, CouplingGraph, Strategy};
use qk::runtime::{Pipeline, Placement, QuantumRuntime};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let registry = KernelRegistry::new();
    registry.load_file(Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/kernels/ghz.qk")))?;
    let circuit = registry.instantiate("ghz", &[KernelArg::Qreg(5)])?;
    let vigo = CouplingGraph::builtin("vigo")?;

    for strategy in [Strategy::Ssp, Strategy::Sabre] {
        let placed = place(&circuit, &vigo, strategy, None)?;
        println!("-- {strategy}: {} swap(s), final map {:?}", placed.added_two_qubit_gates, placed.final_map);
        print_circuit(&placed.circuit, &mut std::io::stdout())?;
    }

    let pipeline = Pipeline { placement: Some(Placement { graph: vigo, strategy: Strategy::Ssp }), ..Pipeline::default() };
    let mut q = qalloc(5)?;
    registry.invoke("ghz", &mut q, &[], &QuantumRuntime::default().pipeline(pipeline))?;
    q.print(&mut std::io::stdout())?;
    Ok(())
}

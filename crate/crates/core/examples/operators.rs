//! Pauli and fermion operator algebra, Jordan-Wigner, and observation into measured circuits.

use qk::hybrid::{jordan_wigner, observe, FermionOperator, PauliOperator, X, Y, Z};
use qk::ir::{Circuit, Instruction};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("X0 X0 = {}", X(0) * X(0));
    println!("X0 Y0 = {}", X(0) * Y(0));

    let parsed = PauliOperator::parse("2.2 X0 X1 + 3.3 Y0 Y1")?;
    println!("parsed: {parsed}");

    let hopping = FermionOperator::adag(1) * FermionOperator::a(0) + FermionOperator::adag(0) * FermionOperator::a(1);
    println!("jw({hopping}) = {}", jordan_wigner(&hopping));

    let h = 5.907 - 2.1433 * X(0) * X(1) - 2.1433 * Y(0) * Y(1) + 0.21829 * Z(0) - 6.125 * Z(1);
    let prep = Circuit::from_instructions("prep", [Instruction::x(0)]);
    let obs = observe(&h, &prep)?;
    println!("offset {}", obs.offset.re);
    for t in &obs.terms {
        println!("{:+.5} {}: {} instructions", t.coefficient.re, t.term, t.circuit.flatten().len());
    }
    Ok(())
}

//! Natively provided kernels.

use std::f64::consts::PI;

use crate::ir::{adjoint, Circuit, Instruction};

/// Names resolvable from any kernel without a definition.
pub const STDLIB_KERNELS: &[&str] = &["qft", "iqft"];

/// Quantum Fourier transform on qubits `start..start + n`, with qubit `start` as the least
/// significant bit. With `swap` the result is the DFT `ω^{jk}/√N`; without it the output
/// register comes out bit-reversed.
pub fn qft(start: usize, n: usize, swap: bool) -> Circuit {
    let mut c = Circuit::new("qft");
    for i in (0..n).rev() {
        c.push(Instruction::h(start + i));
        for m in (0..i).rev() {
            c.push(Instruction::cphase(start + m, start + i, PI / f64::from(1u32 << (i - m).min(31))));
        }
    }
    if swap {
        for i in 0..n / 2 {
            c.push(Instruction::swap(start + i, start + n - 1 - i));
        }
    }
    c
}

/// Inverse of [`qft`].
pub fn iqft(start: usize, n: usize, swap: bool) -> Circuit {
    let mut c = adjoint(&qft(start, n, swap)).expect("qft is unitary");
    c.name = "iqft".into();
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{to_unitary, GateKind, Matrix};
    use num_complex::Complex64;

    fn dft(n: usize) -> Matrix {
        let dim = 1usize << n;
        let rows: Vec<Vec<Complex64>> = (0..dim)
            .map(|j| {
                (0..dim)
                    .map(|k| Complex64::from_polar(1.0 / (dim as f64).sqrt(), 2.0 * PI * (j * k) as f64 / dim as f64))
                    .collect()
            })
            .collect();
        Matrix::from_rows(&rows)
    }

    #[test]
    fn one_qubit_is_hadamard() {
        let u = to_unitary(&qft(0, 1, true), 1).unwrap();
        assert!(u.approx_eq(&GateKind::H.matrix(&[]).unwrap(), 1e-12));
    }

    #[test]
    fn matches_dft() {
        for n in 1..=4 {
            let u = to_unitary(&qft(0, n, true), n).unwrap();
            assert!(u.approx_eq(&dft(n), 1e-10), "n={n}");
        }
        // n=2 entries are powers of i over 2.
        let u = to_unitary(&qft(0, 2, true), 2).unwrap();
        assert!((u[(1, 1)] - Complex64::new(0.0, 0.5)).norm() < 1e-12);
        assert!((u[(1, 3)] - Complex64::new(0.0, -0.5)).norm() < 1e-12);
    }

    #[test]
    fn inverse_pair() {
        for swap in [true, false] {
            let mut c = qft(1, 3, swap);
            c.push_circuit(iqft(1, 3, swap));
            assert!(to_unitary(&c, 4).unwrap().approx_eq(&Matrix::identity(16), 1e-9));
        }
    }

    #[test]
    fn without_swap_is_bit_reversed() {
        let n = 3;
        let mut c = qft(0, n, false);
        for i in 0..n / 2 {
            c.push(Instruction::swap(i, n - 1 - i));
        }
        assert!(to_unitary(&c, n).unwrap().approx_eq(&dft(n), 1e-10));
    }
}

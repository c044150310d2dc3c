//! Two-level (Givens) synthesis of small unitaries.

use num_complex::Complex64;

use super::FrontendError;
use crate::ir::{multi_controlled, Circuit, Matrix};

pub const MAX_SYNTHESIS_QUBITS: usize = 3;

/// Default unitarity check tolerance for `decompose` blocks.
pub const UNITARITY_TOL: f64 = 1e-9;

const SKIP_TOL: f64 = 1e-14;

/// A unitary acting only on basis states `i` and `j`, as a 2×2 matrix in `(i, j)` order.
struct TwoLevel {
    i: usize,
    j: usize,
    w: Matrix,
}

/// Synthesizes `u` over `targets` (matrix index bit `k` is `targets[k]`), exact up to global
/// phase. Each two-level factor becomes a Gray-code walk of multi-controlled X gates around
/// one fully controlled single-qubit gate.
pub fn decompose_unitary(u: &Matrix, targets: &[usize], tolerance: f64) -> Result<Circuit, FrontendError> {
    let n = targets.len();
    if n > MAX_SYNTHESIS_QUBITS {
        return Err(FrontendError::TooManyQubitsForSynthesis { max: MAX_SYNTHESIS_QUBITS, got: n });
    }
    if u.dim() != 1 << n {
        return Err(FrontendError::DimensionMismatch { dim: u.dim(), qubits: n });
    }
    let deviation = (&u.dagger() * u).max_abs_diff(&Matrix::identity(u.dim()));
    if !(deviation <= tolerance) {
        return Err(FrontendError::NotUnitary { deviation });
    }
    let mut circuit = Circuit::new("decompose");
    if n == 0 {
        return Ok(circuit);
    }
    for op in two_level_factors(u).iter().rev() {
        emit(&mut circuit, op, targets);
    }
    Ok(circuit)
}

/// Returns `F` with `U = F[0] · F[1] · … ` where each factor is two-level.
fn two_level_factors(u: &Matrix) -> Vec<TwoLevel> {
    let d = u.dim();
    let mut v = u.clone();
    let mut factors = Vec::new();
    let one = Complex64::new(1.0, 0.0);
    for c in 0..d - 1 {
        for r in c + 1..d {
            let b = v[(r, c)];
            if b.norm() < SKIP_TOL {
                continue;
            }
            let a = v[(c, c)];
            let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
            let g = Matrix::from_rows(&[[a.conj() / norm, b.conj() / norm], [-b / norm, a / norm]]);
            rotate_rows(&mut v, c, r, &g);
            factors.push(TwoLevel { i: c, j: r, w: g.dagger() });
        }
        let a = v[(c, c)];
        if (a - one).norm() > SKIP_TOL {
            let g = Matrix::diagonal(&[a.conj(), a]);
            rotate_rows(&mut v, c, c + 1, &g);
            factors.push(TwoLevel { i: c, j: c + 1, w: g.dagger() });
        }
    }
    let last = v[(d - 1, d - 1)];
    if (last - one).norm() > SKIP_TOL {
        factors.push(TwoLevel { i: d - 2, j: d - 1, w: Matrix::diagonal(&[one, last]) });
    }
    factors
}

fn rotate_rows(v: &mut Matrix, i: usize, j: usize, g: &Matrix) {
    for col in 0..v.dim() {
        let (x, y) = (v[(i, col)], v[(j, col)]);
        v[(i, col)] = g[(0, 0)] * x + g[(0, 1)] * y;
        v[(j, col)] = g[(1, 0)] * x + g[(1, 1)] * y;
    }
}

fn emit(circuit: &mut Circuit, op: &TwoLevel, targets: &[usize]) {
    let n = targets.len();
    let x = Matrix::from_real_rows(&[[0.0, 1.0], [1.0, 0.0]]);
    let controls_for = |state: usize, skip: usize| -> Vec<(usize, bool)> {
        (0..n).filter(|&b| b != skip).map(|b| (targets[b], state >> b & 1 == 1)).collect()
    };
    let diff: Vec<usize> = (0..n).filter(|b| (op.i ^ op.j) >> b & 1 == 1).collect();
    let mut path = vec![op.i];
    for &b in &diff {
        path.push(path.last().expect("non-empty") ^ (1 << b));
    }
    let k = diff.len();
    let mut walk = Vec::new();
    for t in 0..k - 1 {
        walk.extend(multi_controlled(&controls_for(path[t], diff[t]), targets[diff[t]], &x));
    }
    let from = path[k - 1];
    let bit = diff[k - 1];
    let w = if from >> bit & 1 == 0 { op.w.clone() } else { &(&x * &op.w) * &x };
    circuit.extend(walk.iter().cloned());
    circuit.extend(multi_controlled(&controls_for(from, bit), targets[bit], &w));
    for t in (0..k - 1).rev() {
        circuit.extend(multi_controlled(&controls_for(path[t], diff[t]), targets[diff[t]], &x));
    }
}

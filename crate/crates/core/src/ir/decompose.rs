//! Exact gate-level decompositions of controlled operations.

use num_complex::Complex64;

use super::{GateKind, Instruction, Matrix};

const ANGLE_EPS: f64 = 1e-14;

/// Euler angles with `U = e^{iα} Rz(β) Ry(γ) Rz(δ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZyzAngles {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

pub fn zyz_angles(u: &Matrix) -> ZyzAngles {
    assert_eq!(u.dim(), 2, "zyz decomposition needs a 2x2 matrix");
    let alpha = u.determinant_2x2().arg() / 2.0;
    let v = u.scale(Complex64::from_polar(1.0, -alpha));
    let (c, s) = (v[(0, 0)].norm(), v[(1, 0)].norm());
    let gamma = 2.0 * s.atan2(c);
    let sum = if c > 1e-12 { 2.0 * v[(1, 1)].arg() } else { 0.0 };
    let diff = if s > 1e-12 { 2.0 * v[(1, 0)].arg() } else { 0.0 };
    ZyzAngles { alpha, beta: (sum + diff) / 2.0, gamma, delta: (sum - diff) / 2.0 }
}

fn push_rotation(out: &mut Vec<Instruction>, kind: GateKind, q: usize, angle: f64) {
    if angle.abs() > ANGLE_EPS {
        out.push(Instruction::rotation(kind, q, angle));
    }
}

/// Rz·Ry·Rz sequence equal to `u` up to global phase; identity rotations are omitted.
pub(crate) fn single_qubit_sequence(u: &Matrix, q: usize) -> Vec<Instruction> {
    let a = zyz_angles(u);
    let mut out = Vec::new();
    push_rotation(&mut out, GateKind::Rz, q, a.delta);
    push_rotation(&mut out, GateKind::Ry, q, a.gamma);
    push_rotation(&mut out, GateKind::Rz, q, a.beta);
    out
}

/// Exact controlled-`u` from single-qubit rotations and two CX gates, with the relative
/// phase carried by a `U1` on the control.
pub fn controlled_single_qubit(u: &Matrix, control: usize, target: usize) -> Vec<Instruction> {
    if is_pauli_x(u) {
        return vec![Instruction::cx(control, target)];
    }
    let ZyzAngles { alpha, beta, gamma, delta } = zyz_angles(u);
    let mut out = Vec::new();
    // C
    push_rotation(&mut out, GateKind::Rz, target, (delta - beta) / 2.0);
    out.push(Instruction::cx(control, target));
    // B
    push_rotation(&mut out, GateKind::Rz, target, -(delta + beta) / 2.0);
    push_rotation(&mut out, GateKind::Ry, target, -gamma / 2.0);
    out.push(Instruction::cx(control, target));
    // A
    push_rotation(&mut out, GateKind::Ry, target, gamma / 2.0);
    push_rotation(&mut out, GateKind::Rz, target, beta);
    push_rotation(&mut out, GateKind::U1, control, alpha);
    out
}

/// Six-CX Toffoli network.
pub fn toffoli(c1: usize, c2: usize, target: usize) -> Vec<Instruction> {
    use GateKind::{Tdg, H, T};
    let one = Instruction::one;
    vec![
        one(H, target),
        Instruction::cx(c2, target),
        one(Tdg, target),
        Instruction::cx(c1, target),
        one(T, target),
        Instruction::cx(c2, target),
        one(Tdg, target),
        Instruction::cx(c1, target),
        one(T, c2),
        one(T, target),
        one(H, target),
        Instruction::cx(c1, c2),
        one(T, c1),
        one(Tdg, c2),
        Instruction::cx(c1, c2),
    ]
}

/// A square root `V` of a 2x2 unitary (`V·V = u`).
pub fn sqrt_unitary_2x2(u: &Matrix) -> Matrix {
    let tr = u.trace();
    let det = u.determinant_2x2();
    let disc = (tr * tr - 4.0 * det).sqrt();
    let (l1, l2) = ((tr + disc) / 2.0, (tr - disc) / 2.0);
    let s1 = l1.sqrt();
    let mut s2 = l2.sqrt();
    if (s1 - s2).norm() > (s1 + s2).norm() {
        s2 = -s2;
    }
    // Cayley-Hamilton: V^2 - (s1+s2)V + s1 s2 I = 0.
    let sum = s1 + s2;
    let mut v = u.clone();
    v[(0, 0)] += s1 * s2;
    v[(1, 1)] += s1 * s2;
    v.scale(sum.inv())
}

fn is_pauli_x(u: &Matrix) -> bool {
    u.approx_eq(&GateKind::X.matrix(&[]).expect("X is unitary"), 1e-14)
}

/// Exact multi-controlled `u` on `target`. Each control is `(qubit, polarity)`; a control with
/// polarity `false` fires on |0⟩. With no controls the result is exact up to global phase.
pub fn multi_controlled(controls: &[(usize, bool)], target: usize, u: &Matrix) -> Vec<Instruction> {
    let mut out = Vec::new();
    let flips: Vec<usize> = controls.iter().filter(|(_, p)| !p).map(|(q, _)| *q).collect();
    out.extend(flips.iter().map(|&q| Instruction::x(q)));
    let qubits: Vec<usize> = controls.iter().map(|(q, _)| *q).collect();
    out.extend(positive_controlled(&qubits, target, u));
    out.extend(flips.iter().map(|&q| Instruction::x(q)));
    out
}

fn positive_controlled(controls: &[usize], target: usize, u: &Matrix) -> Vec<Instruction> {
    match controls {
        [] => single_qubit_sequence(u, target),
        [c] => controlled_single_qubit(u, *c, target),
        [a, b] if is_pauli_x(u) => toffoli(*a, *b, target),
        _ => {
            let (&last, rest) = controls.split_last().expect("non-empty");
            let v = sqrt_unitary_2x2(u);
            let x = GateKind::X.matrix(&[]).expect("X is unitary");
            let mut out = controlled_single_qubit(&v, last, target);
            out.extend(positive_controlled(rest, last, &x));
            out.extend(controlled_single_qubit(&v.dagger(), last, target));
            out.extend(positive_controlled(rest, last, &x));
            out.extend(positive_controlled(rest, target, &v));
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{to_unitary, Circuit};

    fn random_u(seed: u64) -> Matrix {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut a = || rng.random_range(-3.0..3.0);
        let m = crate::ir::gate::u3_matrix(a(), a(), a());
        m.scale(Complex64::from_polar(1.0, a()))
    }

    fn circuit(insts: Vec<Instruction>) -> Circuit {
        Circuit::from_instructions("t", insts)
    }

    #[test]
    fn zyz_reconstructs() {
        for seed in 0..50 {
            let u = random_u(seed);
            let a = zyz_angles(&u);
            let rz = |t: f64| GateKind::Rz.matrix(&[t]).unwrap();
            let ry = GateKind::Ry.matrix(&[a.gamma]).unwrap();
            let r = &(&rz(a.beta) * &ry) * &rz(a.delta);
            assert!(r.scale(Complex64::from_polar(1.0, a.alpha)).approx_eq(&u, 1e-12), "seed {seed}");
        }
        for kind in [GateKind::X, GateKind::Z, GateKind::H, GateKind::S] {
            let u = kind.matrix(&[]).unwrap();
            let a = zyz_angles(&u);
            let rz = |t: f64| GateKind::Rz.matrix(&[t]).unwrap();
            let r = &(&rz(a.beta) * &GateKind::Ry.matrix(&[a.gamma]).unwrap()) * &rz(a.delta);
            assert!(r.scale(Complex64::from_polar(1.0, a.alpha)).approx_eq(&u, 1e-12), "{kind}");
        }
    }

    #[test]
    fn sqrt_squares_back() {
        for seed in 0..50 {
            let u = random_u(seed);
            let v = sqrt_unitary_2x2(&u);
            assert!((&v * &v).approx_eq(&u, 1e-12));
            assert!(v.is_unitary(1e-12));
        }
        let z = GateKind::Z.matrix(&[]).unwrap();
        assert!((&sqrt_unitary_2x2(&z) * &sqrt_unitary_2x2(&z)).approx_eq(&z, 1e-12));
    }

    #[test]
    fn toffoli_is_ccx() {
        let u = to_unitary(&circuit(toffoli(0, 1, 2)), 3).unwrap();
        let mut expect = Matrix::identity(8);
        // controls q0,q1 set: indices 3 (q2=0) and 7 (q2=1)
        expect[(3, 3)] = Complex64::new(0.0, 0.0);
        expect[(7, 7)] = Complex64::new(0.0, 0.0);
        expect[(3, 7)] = Complex64::new(1.0, 0.0);
        expect[(7, 3)] = Complex64::new(1.0, 0.0);
        assert!(u.approx_eq(&expect, 1e-12));
    }

    fn embedding(controls: &[(usize, bool)], target: usize, u: &Matrix, n: usize) -> Matrix {
        let dim = 1 << n;
        let mut m = Matrix::zeros(dim);
        for col in 0..dim {
            let fires = controls.iter().all(|&(q, p)| ((col >> q) & 1 == 1) == p);
            if !fires {
                m[(col, col)] = Complex64::new(1.0, 0.0);
                continue;
            }
            let b = (col >> target) & 1;
            let base = col & !(1 << target);
            m[(base, col)] = u[(0, b)];
            m[(base | (1 << target), col)] = u[(1, b)];
        }
        m
    }

    #[test]
    fn multi_controlled_is_exact() {
        let cases: Vec<Vec<(usize, bool)>> = vec![
            vec![(1, true)],
            vec![(0, false)],
            vec![(0, true), (2, true)],
            vec![(0, false), (1, true)],
            vec![(0, true), (1, true), (3, false)],
        ];
        for (i, controls) in cases.iter().enumerate() {
            let target = (0..4).find(|t| controls.iter().all(|(q, _)| q != t)).unwrap();
            let u = random_u(100 + i as u64);
            let got = to_unitary(&circuit(multi_controlled(controls, target, &u)), 4).unwrap();
            let want = embedding(controls, target, &u, 4);
            assert!(got.approx_eq(&want, 1e-10), "case {i}: {}", got.max_abs_diff(&want));
        }
    }
}

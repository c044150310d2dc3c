#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qk::frontend::KernelRegistry;
use qk::ir::{Circuit, GateKind, Instruction};

pub type CMat = DMatrix<Complex64>;

pub fn kernel_path(file: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/kernels").join(file)
}

pub fn load(file: &str) -> KernelRegistry {
    let r = KernelRegistry::new();
    r.load_file(&kernel_path(file)).unwrap_or_else(|e| panic!("{file}: {e}"));
    r
}

pub fn unitary_kinds() -> Vec<GateKind> {
    GateKind::ALL.iter().copied().filter(|k| k.is_unitary()).collect()
}

pub fn random_instruction(rng: &mut impl Rng, n: usize, kinds: &[GateKind]) -> Instruction {
    loop {
        let kind = kinds[rng.random_range(0..kinds.len())];
        if kind.arity() > n {
            continue;
        }
        let a = rng.random_range(0..n);
        let mut qubits = vec![a];
        if kind.arity() == 2 {
            let mut b = rng.random_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            qubits.push(b);
        }
        let params = (0..kind.param_count()).map(|_| rng.random_range(-4.0..4.0)).collect();
        return Instruction::new(kind, qubits, params).unwrap();
    }
}

/// Measure-free circuit of `len` gates drawn uniformly from every unitary kind.
pub fn random_circuit(seed: u64, n: usize, len: usize) -> Circuit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kinds = unitary_kinds();
    Circuit::from_instructions(format!("rand{seed}"), (0..len).map(|_| random_instruction(&mut rng, n, &kinds)))
}

/// Circuit biased towards cancelling and mergeable neighbours, so the optimizer has work.
pub fn redundant_circuit(seed: u64, n: usize, len: usize) -> Circuit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kinds = unitary_kinds();
    let mut out: Vec<Instruction> = Vec::new();
    while out.len() < len {
        let inst = random_instruction(&mut rng, n, &kinds);
        match rng.random_range(0..3) {
            0 => {
                out.push(inst.clone());
                out.push(inst.inverse().unwrap());
            }
            1 => {
                let q = inst.qubits[0];
                out.push(Instruction::rz(q, rng.random_range(-1.0..1.0)));
                out.push(Instruction::rz(q, rng.random_range(-1.0..1.0)));
            }
            _ => out.push(inst),
        }
    }
    Circuit::from_instructions(format!("redundant{seed}"), out)
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn pauli_x() -> CMat {
    CMat::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
}

pub fn pauli_y() -> CMat {
    CMat::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])
}

pub fn pauli_z() -> CMat {
    CMat::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
}

/// Dense matrix of a product of single-qubit factors on `n` qubits, qubit 0 least significant.
pub fn dense_string(factors: &[(usize, char)], n: usize) -> CMat {
    let mut m = CMat::identity(1, 1);
    for q in (0..n).rev() {
        let f = match factors.iter().find(|(fq, _)| *fq == q).map(|(_, p)| *p) {
            Some('X') => pauli_x(),
            Some('Y') => pauli_y(),
            Some('Z') => pauli_z(),
            _ => CMat::identity(2, 2),
        };
        m = m.kronecker(&f);
    }
    m
}

fn real_embedding(h: &CMat) -> DMatrix<f64> {
    let n = h.nrows();
    let mut big = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for r in 0..n {
        for col in 0..n {
            let v = h[(r, col)];
            big[(r, col)] = v.re;
            big[(r + n, col + n)] = v.re;
            big[(r, col + n)] = -v.im;
            big[(r + n, col)] = v.im;
        }
    }
    big
}

/// Ground energy of a Hermitian matrix from nalgebra's eigen-solver on the real-symmetric
/// embedding [[Re, -Im], [Im, Re]], which doubles every eigenvalue.
pub fn min_eigenvalue(h: &CMat) -> f64 {
    real_embedding(h).symmetric_eigen().eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// `exp(-i t G)` for Hermitian `G` via its eigendecomposition.
pub fn expm_hermitian(g: &CMat, t: f64) -> CMat {
    let n = g.nrows();
    let eig = real_embedding(g).symmetric_eigen();
    // exp(-itG) = cos(tG) - i sin(tG), each computed on the embedding.
    let cos = &eig.eigenvectors * DMatrix::from_diagonal(&eig.eigenvalues.map(|l| (t * l).cos())) * eig.eigenvectors.transpose();
    let sin = &eig.eigenvectors * DMatrix::from_diagonal(&eig.eigenvalues.map(|l| (t * l).sin())) * eig.eigenvectors.transpose();
    let mut res = CMat::zeros(n, n);
    for r in 0..n {
        for col in 0..n {
            // Real part sits in the top-left block, imaginary part in the bottom-left.
            let cr = cos[(r, col)];
            let ci = cos[(r + n, col)];
            let sr = sin[(r, col)];
            let si = sin[(r + n, col)];
            res[(r, col)] = c(cr + si, ci - sr);
        }
    }
    res
}

pub fn tv_distance(a: &BTreeMap<String, usize>, b: &BTreeMap<String, usize>) -> f64 {
    let (na, nb) = (a.values().sum::<usize>() as f64, b.values().sum::<usize>() as f64);
    let keys: std::collections::BTreeSet<&String> = a.keys().chain(b.keys()).collect();
    keys.into_iter()
        .map(|k| (*a.get(k).unwrap_or(&0) as f64 / na - *b.get(k).unwrap_or(&0) as f64 / nb).abs())
        .sum::<f64>()
        / 2.0
}

pub fn to_dense(m: &qk::ir::Matrix) -> CMat {
    let d = m.dim();
    CMat::from_fn(d, d, |r, col| m[(r, col)])
}

/// Largest entry of |a - e^{iφ} b| for the phase aligning the biggest entry of `b`.
pub fn phase_distance(a: &CMat, b: &CMat) -> f64 {
    let (idx, _) = b.iter().enumerate().fold((0, 0.0), |acc, (i, v)| if v.norm() > acc.1 { (i, v.norm()) } else { acc });
    let (av, bv) = (a.as_slice()[idx], b.as_slice()[idx]);
    if av.norm() < 1e-12 {
        return f64::INFINITY;
    }
    let phase = av / bv;
    let phase = phase / phase.norm();
    a.iter().zip(b.iter()).map(|(x, y)| (x - phase * y).norm()).fold(0.0, f64::max)
}

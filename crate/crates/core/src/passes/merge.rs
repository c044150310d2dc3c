//! Single-qubit run fusion with Euler re-synthesis.

use super::{wrap_angle, Pass};
use crate::ir::{zyz_angles, Instruction, Matrix};

const IDENTITY_TOL: f64 = 1e-10;

/// Multiplies each maximal run of single-qubit gates on a qubit into one 2×2 unitary and
/// re-emits it as at most one gate (`Rz` when diagonal, otherwise `U3`). Runs equal to the
/// identity up to phase disappear.
pub struct SingleQubitGateMerging;

fn resynthesize(u: &Matrix, q: usize) -> Option<Instruction> {
    if u.is_identity_up_to_phase(IDENTITY_TOL) {
        return None;
    }
    let a = zyz_angles(u);
    if a.gamma.abs() < 1e-12 {
        return Some(Instruction::rz(q, wrap_angle(a.beta + a.delta)));
    }
    Some(Instruction::u3(q, a.gamma, a.beta, a.delta))
}

impl Pass for SingleQubitGateMerging {
    fn name(&self) -> &str {
        "single-qubit-gate-merging"
    }

    fn apply(&self, instructions: &[Instruction]) -> Vec<Instruction> {
        let n = instructions.iter().flat_map(|i| i.qubits.iter()).max().map_or(0, |&m| m + 1);
        let mut out: Vec<Option<Instruction>> = instructions.iter().cloned().map(Some).collect();
        // Open run per qubit: positions of its gates so far.
        let mut runs: Vec<Vec<usize>> = vec![Vec::new(); n];
        let close = |run: &mut Vec<usize>, out: &mut Vec<Option<Instruction>>| {
            match run.len() {
                0 => {}
                1 => {
                    let only = out[run[0]].as_ref().expect("run entries are live");
                    if only.matrix().is_some_and(|m| m.is_identity_up_to_phase(IDENTITY_TOL)) {
                        out[run[0]] = None;
                    }
                }
                _ => {
                    let q = out[run[0]].as_ref().expect("run entries are live").qubits[0];
                    let mut u = Matrix::identity(2);
                    for &k in run.iter() {
                        let m = out[k].as_ref().and_then(Instruction::matrix).expect("run gates are unitary");
                        u = &m * &u;
                        out[k] = None;
                    }
                    out[*run.last().expect("non-empty")] = resynthesize(&u, q);
                }
            }
            run.clear();
        };
        for (k, inst) in instructions.iter().enumerate() {
            if inst.qubits.len() == 1 && inst.is_unitary() {
                runs[inst.qubits[0]].push(k);
            } else {
                for &q in &inst.qubits {
                    close(&mut runs[q], &mut out);
                }
            }
        }
        for run in &mut runs {
            close(run, &mut out);
        }
        out.into_iter().flatten().collect()
    }
}

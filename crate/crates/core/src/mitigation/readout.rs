//! Readout-error inversion with tensor-product calibration.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Arc, Mutex, PoisonError};

use super::MitigationError;
use crate::backend::{Backend, BackendError, ExecRequest, NoiseModel, QRegBuffer, Session, Shots};
use crate::ir::{Circuit, GateKind, Instruction};

pub const MAX_CALIBRATION_QUBITS: usize = 12;

/// Per-bit readout confusion: `p01` = P(read 1 | prepared 0), `p10` = P(read 0 | prepared 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfusionMatrix {
    pub p01: f64,
    pub p10: f64,
}

impl ConfusionMatrix {
    /// Inverse of `[[1-p01, p10], [p01, 1-p10]]`.
    fn inverse(&self) -> [[f64; 2]; 2] {
        let det = 1.0 - self.p01 - self.p10;
        [[(1.0 - self.p10) / det, -self.p10 / det], [-self.p01 / det, (1.0 - self.p01) / det]]
    }
}

/// Applies the inverse of the tensor product of `confusion` (entry `i` acts on key position
/// `i`) to a distribution over bitstrings, clips negative entries and renormalizes.
pub fn apply_inverse_confusion(
    dist: &BTreeMap<String, f64>,
    confusion: &[ConfusionMatrix],
) -> Result<BTreeMap<String, f64>, MitigationError> {
    let m = confusion.len();
    if m > MAX_CALIBRATION_QUBITS {
        return Err(MitigationError::TooManyQubitsForCalibration { max: MAX_CALIBRATION_QUBITS, got: m });
    }
    for (qubit, c) in confusion.iter().enumerate() {
        if c.p01 + c.p10 >= 1.0 - 1e-12 {
            return Err(MitigationError::SingularConfusionMatrix { qubit, sum: c.p01 + c.p10 });
        }
    }
    let mut v = vec![0.0; 1 << m];
    for (key, &p) in dist {
        let idx = key.bytes().enumerate().filter(|(_, b)| *b == b'1').fold(0usize, |acc, (i, _)| acc | 1 << i);
        v[idx] += p;
    }
    for (i, c) in confusion.iter().enumerate() {
        let inv = c.inverse();
        let bit = 1 << i;
        for idx in 0..v.len() {
            if idx & bit == 0 {
                let (a, b) = (v[idx], v[idx | bit]);
                v[idx] = inv[0][0] * a + inv[0][1] * b;
                v[idx | bit] = inv[1][0] * a + inv[1][1] * b;
            }
        }
    }
    for x in &mut v {
        *x = x.max(0.0);
    }
    let total: f64 = v.iter().sum();
    Ok(v.iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0)
        .map(|(idx, &p)| ((0..m).map(|i| if idx >> i & 1 == 1 { '1' } else { '0' }).collect(), p / total))
        .collect())
}

type CalibrationKey = (Vec<(usize, usize)>, usize);

/// Runs all-|0⟩ and all-|1⟩ calibration circuits through the wrapped backend and corrects
/// results with the inverse confusion matrices.
pub struct ReadoutMitigator {
    inner: Arc<dyn Backend>,
    cache: Mutex<HashMap<CalibrationKey, Vec<ConfusionMatrix>>>,
}

impl ReadoutMitigator {
    pub fn new(inner: Arc<dyn Backend>) -> Self {
        Self { inner, cache: Mutex::new(HashMap::new()) }
    }

    /// Estimates per-bit confusion for the measurement layout `pairs` (`(qubit, clbit)`).
    /// Entries are ordered by clbit, matching counts key positions.
    pub fn calibrate(&self, pairs: &[(usize, usize)], size: usize, shots: usize, seed: u64) -> Result<Vec<ConfusionMatrix>, BackendError> {
        let key = (pairs.to_vec(), shots);
        if let Some(c) = self.cache.lock().unwrap_or_else(PoisonError::into_inner).get(&key) {
            return Ok(c.clone());
        }
        let clbits: BTreeSet<usize> = pairs.iter().map(|p| p.1).collect();
        if clbits.len() > MAX_CALIBRATION_QUBITS {
            return Err(MitigationError::TooManyQubitsForCalibration { max: MAX_CALIBRATION_QUBITS, got: clbits.len() }.into());
        }
        let measure = |c: &mut Circuit| {
            for &(q, b) in pairs {
                c.push(Instruction::measure_into(q, b));
            }
        };
        let mut zero = Circuit::new("calibrate0");
        measure(&mut zero);
        let mut one = Circuit::new("calibrate1");
        let qubits: BTreeSet<usize> = pairs.iter().map(|p| p.0).collect();
        one.extend(qubits.iter().map(|&q| Instruction::x(q)));
        measure(&mut one);

        let mut b0 = QRegBuffer::new("cal0", size)?;
        self.inner.execute(&zero, &mut b0, &ExecRequest::sampled(shots, seed.wrapping_add(0x5EED_0001)))?;
        let mut b1 = QRegBuffer::new("cal1", size)?;
        self.inner.execute(&one, &mut b1, &ExecRequest::sampled(shots, seed.wrapping_add(0x5EED_0002)))?;
        let (p0, p1) = (b0.probabilities(), b1.probabilities());
        let marginal = |dist: &BTreeMap<String, f64>, pos: usize, want: u8| -> f64 {
            dist.iter().filter(|(k, _)| k.as_bytes()[pos] == want).map(|(_, p)| p).sum()
        };
        let confusion: Vec<ConfusionMatrix> = (0..clbits.len())
            .map(|pos| ConfusionMatrix { p01: marginal(&p0, pos, b'1'), p10: marginal(&p1, pos, b'0') })
            .collect();
        self.cache.lock().unwrap_or_else(PoisonError::into_inner).insert(key, confusion.clone());
        Ok(confusion)
    }
}

impl Backend for ReadoutMitigator {
    fn name(&self) -> String {
        format!("ro-error({})", self.inner.name())
    }

    fn execute(&self, circuit: &Circuit, buffer: &mut QRegBuffer, request: &ExecRequest) -> Result<(), BackendError> {
        self.inner.execute(circuit, buffer, request)?;
        let Shots::Sampled(shots) = request.shots else {
            // Exact probabilities carry no readout error.
            return Ok(());
        };
        let pairs: Vec<(usize, usize)> = circuit
            .iter()
            .filter(|i| i.kind == GateKind::Measure)
            .map(|i| (i.qubits[0], i.clbit.unwrap_or(i.qubits[0])))
            .collect();
        if pairs.is_empty() {
            return Ok(());
        }
        let confusion = self.calibrate(&pairs, buffer.size(), shots, request.seed)?;
        let corrected = apply_inverse_confusion(&buffer.probabilities(), &confusion)?;
        buffer.set_distribution(corrected);
        Ok(())
    }

    fn open_session(&self, n_qubits: usize, seed: u64) -> Result<Box<dyn Session>, BackendError> {
        self.inner.open_session(n_qubits, seed)
    }

    fn noise_model(&self) -> Option<&NoiseModel> {
        self.inner.noise_model()
    }
}

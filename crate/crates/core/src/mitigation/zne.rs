//! Zero-noise extrapolation by global unitary folding.

use std::sync::Arc;

use super::MitigationError;
use crate::backend::{Backend, BackendError, ExecRequest, NoiseModel, QRegBuffer, Session};
use crate::ir::{adjoint, Circuit, GateKind, Instruction};

/// Noise scale factors measured before extrapolating to zero.
pub const ZNE_SCALES: [usize; 3] = [1, 3, 5];

/// Splits off the trailing block of measurements.
fn split_terminal_measures(insts: Vec<Instruction>) -> (Vec<Instruction>, Vec<Instruction>) {
    let cut = insts.iter().rposition(|i| i.kind != GateKind::Measure).map_or(0, |p| p + 1);
    let mut body = insts;
    let tail = body.split_off(cut);
    (body, tail)
}

/// `C (C† C)^k` with `scale = 2k + 1`, followed by the original terminal measurements.
pub fn fold_global(circuit: &Circuit, scale: usize) -> Result<Circuit, MitigationError> {
    if scale.is_multiple_of(2) {
        return Err(MitigationError::InvalidScale(scale));
    }
    let (body, tail) = split_terminal_measures(circuit.flatten());
    if let Some(bad) = body.iter().find(|i| !i.is_unitary()) {
        return Err(MitigationError::FoldingNonUnitary(bad.kind.name().to_string()));
    }
    let forward = Circuit::from_instructions("body", body);
    let inverse = adjoint(&forward).map_err(|e| MitigationError::FoldingNonUnitary(e.to_string()))?.flatten();
    let mut out = forward.flatten();
    for _ in 0..(scale - 1) / 2 {
        out.extend(inverse.iter().cloned());
        out.extend(forward.iter().cloned());
    }
    out.extend(tail);
    Ok(Circuit::from_instructions(format!("{}_fold{scale}", circuit.name), out))
}

/// Ordinary least-squares line through `(scales[i], values[i])`, evaluated at zero.
pub fn linear_extrapolate(scales: &[f64], values: &[f64]) -> Result<f64, MitigationError> {
    let n = scales.len().min(values.len()) as f64;
    let mx = scales.iter().sum::<f64>() / n;
    let my = values.iter().sum::<f64>() / n;
    let sxx: f64 = scales.iter().map(|x| (x - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(MitigationError::DegenerateFit);
    }
    let sxy: f64 = scales.iter().zip(values).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(my - sxy / sxx * mx)
}

/// Measures the parity expectation at each scale in [`ZNE_SCALES`] and reports the
/// zero-noise intercept through [`QRegBuffer::exp_val_z`]. Counts are those of scale 1.
pub struct ZneMitigator {
    inner: Arc<dyn Backend>,
}

impl ZneMitigator {
    pub fn new(inner: Arc<dyn Backend>) -> Self {
        Self { inner }
    }

    fn run_scale(&self, circuit: &Circuit, k: usize, buffer: &mut QRegBuffer, request: &ExecRequest) -> Result<f64, BackendError> {
        let folded = fold_global(circuit, ZNE_SCALES[k])?;
        let req = ExecRequest { seed: request.seed.wrapping_add(k as u64 * 0x9E37), ..*request };
        self.inner.execute(&folded, buffer, &req)?;
        buffer.exp_val_z()
    }
}

impl Backend for ZneMitigator {
    fn name(&self) -> String {
        format!("zne({})", self.inner.name())
    }

    fn execute(&self, circuit: &Circuit, buffer: &mut QRegBuffer, request: &ExecRequest) -> Result<(), BackendError> {
        let mut values = vec![self.run_scale(circuit, 0, buffer, request)?];
        for k in 1..ZNE_SCALES.len() {
            let mut scratch = QRegBuffer::new("zne", buffer.size())?;
            values.push(self.run_scale(circuit, k, &mut scratch, request)?);
        }
        let scales: Vec<f64> = ZNE_SCALES.iter().map(|&s| s as f64).collect();
        buffer.set_mitigated_exp_val(linear_extrapolate(&scales, &values)?);
        Ok(())
    }

    fn open_session(&self, n_qubits: usize, seed: u64) -> Result<Box<dyn Session>, BackendError> {
        self.inner.open_session(n_qubits, seed)
    }

    fn noise_model(&self) -> Option<&NoiseModel> {
        self.inner.noise_model()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::StatevectorSimulator;
    use crate::ir::to_unitary;

    #[test]
    fn folding_scales_gate_count() {
        let c = Circuit::from_instructions(
            "c",
            [Instruction::h(0), Instruction::cx(0, 1), Instruction::rz(1, 0.3), Instruction::measure(0), Instruction::measure(1)],
        );
        for s in ZNE_SCALES {
            let f = fold_global(&c, s).unwrap();
            let insts = f.flatten();
            assert_eq!(insts.len(), 3 * s + 2);
            let body = Circuit::from_instructions("b", insts[..3 * s].to_vec());
            let orig = Circuit::from_instructions("o", c.flatten()[..3].to_vec());
            assert!(to_unitary(&body, 2).unwrap().approx_eq_up_to_phase(&to_unitary(&orig, 2).unwrap(), 1e-9));
        }
        assert_eq!(fold_global(&c, 2), Err(MitigationError::InvalidScale(2)));
        let mid = Circuit::from_instructions("m", [Instruction::measure(0), Instruction::h(0)]);
        assert!(matches!(fold_global(&mid, 3), Err(MitigationError::FoldingNonUnitary(_))));
    }

    #[test]
    fn ols_closed_form() {
        let v: Vec<f64> = [1.0, 3.0, 5.0].iter().map(|s| 1.0 - 0.02 * s).collect();
        assert!((linear_extrapolate(&[1.0, 3.0, 5.0], &v).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(linear_extrapolate(&[2.0, 2.0], &[1.0, 0.0]), Err(MitigationError::DegenerateFit));
    }

    #[test]
    fn noiseless_flat() {
        let z = ZneMitigator::new(Arc::new(StatevectorSimulator::new()));
        let c = Circuit::from_instructions("x", [Instruction::x(0), Instruction::measure(0)]);
        let mut buf = QRegBuffer::new("q", 1).unwrap();
        z.execute(&c, &mut buf, &ExecRequest::sampled(256, 1)).unwrap();
        assert_eq!(buf.exp_val_z().unwrap(), -1.0);
        assert_eq!(buf.counts()["1"], 256);
    }
}

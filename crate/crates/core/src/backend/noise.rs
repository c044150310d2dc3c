use std::path::Path;

use serde::{Deserialize, Serialize};

use super::BackendError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReadoutError {
    pub qubit: usize,
    /// P(read 1 | prepared 0).
    pub p01: f64,
    /// P(read 0 | prepared 1).
    pub p10: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Depolarizing {
    #[serde(default)]
    pub one_qubit: f64,
    #[serde(default)]
    pub two_qubit: f64,
}

/// Per-qubit readout flips plus Pauli-channel depolarizing after each gate.
///
/// JSON form: `{"readout_errors":[{"qubit":0,"p01":0.01,"p10":0.02}],
/// "depolarizing":{"one_qubit":0.001,"two_qubit":0.01}}`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct NoiseModel {
    #[serde(default)]
    pub readout_errors: Vec<ReadoutError>,
    #[serde(default)]
    pub depolarizing: Depolarizing,
}

impl NoiseModel {
    pub fn depolarizing(one_qubit: f64, two_qubit: f64) -> Self {
        Self { readout_errors: Vec::new(), depolarizing: Depolarizing { one_qubit, two_qubit } }
    }

    /// Same readout error on qubits `0..n`.
    pub fn uniform_readout(n: usize, p01: f64, p10: f64) -> Self {
        Self {
            readout_errors: (0..n).map(|qubit| ReadoutError { qubit, p01, p10 }).collect(),
            depolarizing: Depolarizing::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, BackendError> {
        let model: NoiseModel =
            serde_json::from_str(text).map_err(|e| BackendError::InvalidNoiseModel(e.to_string()))?;
        model.validate()?;
        Ok(model)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, BackendError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| BackendError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("noise model serializes")
    }

    pub fn validate(&self) -> Result<(), BackendError> {
        let probs = self
            .readout_errors
            .iter()
            .flat_map(|r| [r.p01, r.p10])
            .chain([self.depolarizing.one_qubit, self.depolarizing.two_qubit]);
        for p in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(BackendError::InvalidNoiseModel(format!("probability {p} outside [0, 1]")));
            }
        }
        Ok(())
    }

    /// `(p01, p10)` for `qubit`; zero when unlisted.
    pub fn readout(&self, qubit: usize) -> (f64, f64) {
        self.readout_errors
            .iter()
            .rev()
            .find(|r| r.qubit == qubit)
            .map_or((0.0, 0.0), |r| (r.p01, r.p10))
    }

    pub fn has_readout_error(&self) -> bool {
        self.readout_errors.iter().any(|r| r.p01 > 0.0 || r.p10 > 0.0)
    }

    pub fn has_gate_error(&self) -> bool {
        self.depolarizing.one_qubit > 0.0 || self.depolarizing.two_qubit > 0.0
    }

    pub fn is_noiseless(&self) -> bool {
        !self.has_readout_error() && !self.has_gate_error()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let text = r#"{"readout_errors":[{"qubit":0,"p01":0.01,"p10":0.02}],
                       "depolarizing":{"one_qubit":0.001,"two_qubit":0.01}}"#;
        let m = NoiseModel::from_json(text).unwrap();
        assert_eq!(m.readout(0), (0.01, 0.02));
        assert_eq!(m.readout(3), (0.0, 0.0));
        assert_eq!(m.depolarizing.two_qubit, 0.01);
        assert_eq!(NoiseModel::from_json(&m.to_json()).unwrap(), m);
    }

    #[test]
    fn partial_and_invalid() {
        let m = NoiseModel::from_json(r#"{"depolarizing":{"one_qubit":0.001}}"#).unwrap();
        assert!(m.has_gate_error() && !m.has_readout_error());
        assert!(NoiseModel::from_json("{}").unwrap().is_noiseless());
        assert!(NoiseModel::from_json(r#"{"depolarizing":{"one_qubit":1.5}}"#).is_err());
        assert!(NoiseModel::from_json("not json").is_err());
    }
}

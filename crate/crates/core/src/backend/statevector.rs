use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Backend, BackendError, ExecRequest, NoiseModel, QRegBuffer, Session, Shots};
use crate::ir::{apply_matrix, Circuit, GateKind, Instruction, Matrix};

pub const MAX_SIM_QUBITS: usize = 24;

/// Dense amplitudes over `n` qubits, little-endian.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn new(n: usize) -> Result<Self, BackendError> {
        if n > MAX_SIM_QUBITS {
            return Err(BackendError::TooManyQubits { max: MAX_SIM_QUBITS, got: n });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn check(&self, qubits: &[usize]) -> Result<(), BackendError> {
        match qubits.iter().find(|&&q| q >= self.n) {
            Some(&q) => Err(BackendError::QubitOutOfRange { qubit: q, size: self.n }),
            None => Ok(()),
        }
    }

    /// Applies a unitary instruction; `Measure`/`Reset` need randomness and go through
    /// [`StateVector::measure`] and [`StateVector::reset`].
    pub fn apply(&mut self, inst: &Instruction) -> Result<(), BackendError> {
        self.check(&inst.qubits)?;
        let m = inst.matrix().ok_or(BackendError::NonUnitary(inst.kind))?;
        apply_matrix(&mut self.amps, &inst.qubits, &m);
        Ok(())
    }

    pub fn apply_matrix(&mut self, qubits: &[usize], m: &Matrix) -> Result<(), BackendError> {
        self.check(qubits)?;
        apply_matrix(&mut self.amps, qubits, m);
        Ok(())
    }

    pub fn prob_one(&self, qubit: usize) -> f64 {
        let bit = 1 << qubit;
        self.amps.iter().enumerate().filter(|(i, _)| i & bit != 0).map(|(_, a)| a.norm_sqr()).sum()
    }

    /// Born-rule measurement with projection and renormalization.
    pub fn measure(&mut self, qubit: usize, rng: &mut impl Rng) -> Result<bool, BackendError> {
        self.check(&[qubit])?;
        let p1 = self.prob_one(qubit);
        let outcome = rng.random::<f64>() < p1;
        self.project(qubit, outcome, if outcome { p1 } else { 1.0 - p1 });
        Ok(outcome)
    }

    fn project(&mut self, qubit: usize, outcome: bool, prob: f64) {
        let bit = 1 << qubit;
        let scale = 1.0 / prob.sqrt();
        for (i, a) in self.amps.iter_mut().enumerate() {
            if (i & bit != 0) == outcome {
                *a *= scale;
            } else {
                *a = Complex64::new(0.0, 0.0);
            }
        }
    }

    pub fn reset(&mut self, qubit: usize, rng: &mut impl Rng) -> Result<(), BackendError> {
        if self.measure(qubit, rng)? {
            self.apply(&Instruction::x(qubit))?;
        }
        Ok(())
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// ⟨ψ|Z_{q1}…Z_{qk}|ψ⟩.
    pub fn expectation_z(&self, qubits: &[usize]) -> f64 {
        let mask: usize = qubits.iter().map(|q| 1 << q).sum();
        self.amps
            .iter()
            .enumerate()
            .map(|(i, a)| if (i & mask).count_ones().is_multiple_of(2) { a.norm_sqr() } else { -a.norm_sqr() })
            .sum()
    }
}

/// Dense statevector simulator with optional Pauli-trajectory noise.
#[derive(Debug, Clone, Default)]
pub struct StatevectorSimulator {
    noise: Option<NoiseModel>,
}

impl StatevectorSimulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_noise(noise: NoiseModel) -> Self {
        Self { noise: Some(noise) }
    }

    fn gate_noise(&self) -> Option<&NoiseModel> {
        self.noise.as_ref().filter(|n| n.has_gate_error())
    }

    /// Final state of a measurement-free circuit.
    pub fn statevector(&self, circuit: &Circuit, n: usize) -> Result<StateVector, BackendError> {
        let mut state = StateVector::new(n)?;
        for inst in circuit.iter() {
            state.apply(inst)?;
        }
        Ok(state)
    }
}

/// Measure map of a circuit: `(qubit, clbit)` per Measure and the sorted distinct clbits.
fn measurements(insts: &[Instruction]) -> (Vec<(usize, usize)>, Vec<usize>) {
    let pairs: Vec<(usize, usize)> = insts
        .iter()
        .filter(|i| i.kind == GateKind::Measure)
        .map(|i| (i.qubits[0], i.clbit.unwrap_or(i.qubits[0])))
        .collect();
    let clbits: BTreeSet<usize> = pairs.iter().map(|p| p.1).collect();
    (pairs, clbits.into_iter().collect())
}

/// True when every Measure is the last operation on its qubit and there is no Reset.
fn measurements_terminal(insts: &[Instruction]) -> bool {
    let mut measured = HashMap::new();
    for inst in insts {
        if inst.kind == GateKind::Reset {
            return false;
        }
        if inst.qubits.iter().any(|q| measured.contains_key(q)) {
            return false;
        }
        if inst.kind == GateKind::Measure {
            measured.insert(inst.qubits[0], ());
        }
    }
    true
}

fn bitstring(clbits: &[usize], values: &HashMap<usize, bool>) -> String {
    clbits.iter().map(|c| if values.get(c).copied().unwrap_or(false) { '1' } else { '0' }).collect()
}

fn flip_readout(noise: Option<&NoiseModel>, qubit: usize, bit: bool, rng: &mut impl Rng) -> bool {
    let Some(noise) = noise else { return bit };
    let (p01, p10) = noise.readout(qubit);
    let p = if bit { p10 } else { p01 };
    if p > 0.0 && rng.random::<f64>() < p {
        !bit
    } else {
        bit
    }
}

const PAULIS: [GateKind; 3] = [GateKind::X, GateKind::Y, GateKind::Z];

/// Applies one random non-identity Pauli on the gate's qubits with the configured probability.
fn depolarize(state: &mut StateVector, inst: &Instruction, noise: &NoiseModel, rng: &mut impl Rng) -> Result<(), BackendError> {
    if !inst.kind.is_unitary() {
        return Ok(());
    }
    let p = match inst.qubits.len() {
        1 => noise.depolarizing.one_qubit,
        _ => noise.depolarizing.two_qubit,
    };
    if p <= 0.0 || rng.random::<f64>() >= p {
        return Ok(());
    }
    let k = inst.qubits.len();
    // Index 1..4^k encodes one Pauli (0 = I) per qubit in base 4.
    let mut code = rng.random_range(1..4usize.pow(k as u32));
    for &q in &inst.qubits {
        let digit = code % 4;
        code /= 4;
        if digit > 0 {
            state.apply(&Instruction::one(PAULIS[digit - 1], q))?;
        }
    }
    Ok(())
}

impl Backend for StatevectorSimulator {
    fn name(&self) -> String {
        "sim".into()
    }

    fn noise_model(&self) -> Option<&NoiseModel> {
        self.noise.as_ref()
    }

    fn execute(&self, circuit: &Circuit, buffer: &mut QRegBuffer, request: &ExecRequest) -> Result<(), BackendError> {
        let insts = circuit.flatten();
        let n = buffer.size();
        if let Some((q, _)) = insts.iter().flat_map(|i| i.qubits.iter().map(move |q| (*q, i))).find(|(q, _)| *q >= n) {
            return Err(BackendError::QubitOutOfRange { qubit: q, size: n });
        }
        let (pairs, clbits) = measurements(&insts);
        let terminal = measurements_terminal(&insts);
        let mut rng = ChaCha8Rng::seed_from_u64(request.seed);
        let readout = self.noise.as_ref().filter(|m| m.has_readout_error());

        let shots = match request.shots {
            Shots::Exact => {
                if !terminal || self.noise.as_ref().is_some_and(|m| !m.is_noiseless()) {
                    return Err(BackendError::ExactModeUnsupported);
                }
                let unitary: Vec<Instruction> = insts.iter().filter(|i| i.kind != GateKind::Measure).cloned().collect();
                let state = self.statevector(&Circuit::from_instructions("exact", unitary), n)?;
                let mut dist: BTreeMap<String, f64> = BTreeMap::new();
                for (idx, p) in state.probabilities().into_iter().enumerate() {
                    if p == 0.0 {
                        continue;
                    }
                    let values: HashMap<usize, bool> = pairs.iter().map(|&(q, c)| (c, (idx >> q) & 1 == 1)).collect();
                    *dist.entry(bitstring(&clbits, &values)).or_default() += p;
                }
                buffer.set_distribution(dist);
                return Ok(());
            }
            Shots::Sampled(0) => return Err(BackendError::ZeroShots),
            Shots::Sampled(s) => s,
        };

        let mut counts: HashMap<String, usize> = HashMap::new();
        if terminal && self.gate_noise().is_none() {
            let unitary: Vec<Instruction> = insts.iter().filter(|i| i.kind != GateKind::Measure).cloned().collect();
            let state = self.statevector(&Circuit::from_instructions("final", unitary), n)?;
            let mut cumulative = Vec::with_capacity(1 << n);
            let mut acc = 0.0;
            for p in state.probabilities() {
                acc += p;
                cumulative.push(acc);
            }
            for _ in 0..shots {
                let r = rng.random::<f64>() * acc;
                let idx = cumulative.partition_point(|&c| c <= r).min(cumulative.len() - 1);
                let mut values = HashMap::new();
                for &(q, c) in &pairs {
                    values.insert(c, flip_readout(readout, q, (idx >> q) & 1 == 1, &mut rng));
                }
                *counts.entry(bitstring(&clbits, &values)).or_default() += 1;
            }
        } else {
            for _ in 0..shots {
                let mut state = StateVector::new(n)?;
                let mut values = HashMap::new();
                for inst in &insts {
                    match inst.kind {
                        GateKind::Measure => {
                            let q = inst.qubits[0];
                            let bit = state.measure(q, &mut rng)?;
                            values.insert(inst.clbit.unwrap_or(q), flip_readout(readout, q, bit, &mut rng));
                        }
                        GateKind::Reset => state.reset(inst.qubits[0], &mut rng)?,
                        _ => {
                            state.apply(inst)?;
                            if let Some(noise) = self.gate_noise() {
                                depolarize(&mut state, inst, noise, &mut rng)?;
                            }
                        }
                    }
                }
                *counts.entry(bitstring(&clbits, &values)).or_default() += 1;
            }
        }
        buffer.set_counts(counts.into_iter().collect(), shots);
        Ok(())
    }

    fn open_session(&self, n_qubits: usize, seed: u64) -> Result<Box<dyn Session>, BackendError> {
        Ok(Box::new(SimSession {
            state: StateVector::new(n_qubits)?,
            rng: ChaCha8Rng::seed_from_u64(seed),
            noise: self.noise.clone(),
            results: BTreeMap::new(),
        }))
    }
}

/// Streaming session: each instruction acts on the live state immediately.
#[derive(Debug)]
pub struct SimSession {
    state: StateVector,
    rng: ChaCha8Rng,
    noise: Option<NoiseModel>,
    results: BTreeMap<usize, bool>,
}

impl SimSession {
    pub fn state(&self) -> &StateVector {
        &self.state
    }
}

impl Session for SimSession {
    fn num_qubits(&self) -> usize {
        self.state.num_qubits()
    }

    fn apply(&mut self, inst: &Instruction) -> Result<Option<bool>, BackendError> {
        match inst.kind {
            GateKind::Measure => {
                let q = inst.qubits[0];
                let bit = self.measure(q)?;
                self.results.insert(inst.clbit.unwrap_or(q), bit);
                Ok(Some(bit))
            }
            GateKind::Reset => {
                self.state.reset(inst.qubits[0], &mut self.rng)?;
                Ok(None)
            }
            _ => {
                self.state.apply(inst)?;
                if let Some(noise) = self.noise.as_ref().filter(|n| n.has_gate_error()) {
                    depolarize(&mut self.state, inst, noise, &mut self.rng)?;
                }
                Ok(None)
            }
        }
    }

    fn measure(&mut self, qubit: usize) -> Result<bool, BackendError> {
        let bit = self.state.measure(qubit, &mut self.rng)?;
        Ok(flip_readout(self.noise.as_ref(), qubit, bit, &mut self.rng))
    }

    fn results(&self) -> &BTreeMap<usize, bool> {
        &self.results
    }

    fn peek_state(&self) -> Option<&StateVector> {
        Some(&self.state)
    }
}

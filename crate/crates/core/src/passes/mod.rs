//! Circuit optimization passes, a name-keyed pass registry and numbered optimization levels.
//!
//! Every pass works on the flattened instruction list and returns a flat circuit. Measure and
//! Reset act as barriers on the qubits they touch, so a trailing measurement block is left
//! alone and gates are never moved across it.

mod merge;
mod optimizer;
mod rotation;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

pub use merge::SingleQubitGateMerging;
pub use optimizer::CircuitOptimizer;
pub use rotation::RotationFolding;

use crate::ir::{Circuit, CircuitStats, GateKind, Instruction};

/// Angles closer than this to a full turn count as zero.
pub const ANGLE_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PassError {
    #[error("unknown pass '{name}' (available: {available})")]
    UnknownPass { name: String, available: String },
    #[error("unknown optimization level {0} (available: 0, 1)")]
    UnknownOptLevel(u8),
}

/// A circuit-to-circuit transformation.
pub trait Pass: Send + Sync {
    fn name(&self) -> &str;
    fn apply(&self, instructions: &[Instruction]) -> Vec<Instruction>;
}

/// Wall time and gate-count summary of one pass execution.
#[derive(Debug, Clone, PartialEq)]
pub struct PassStats {
    pub pass_name: String,
    pub wall_time: Duration,
    pub gates_before: CircuitStats,
    pub gates_after: CircuitStats,
    pub reduction_fraction: f64,
}

#[derive(Serialize)]
struct StatsJson<'a> {
    name: &'a str,
    ms: f64,
    before: &'a BTreeMap<GateKind, usize>,
    after: &'a BTreeMap<GateKind, usize>,
    total_before: usize,
    total_after: usize,
    reduction_fraction: f64,
}

impl PassStats {
    fn new(pass_name: &str, wall_time: Duration, before: CircuitStats, after: CircuitStats) -> Self {
        let reduction_fraction = if before.total_gates == 0 {
            0.0
        } else {
            1.0 - after.total_gates as f64 / before.total_gates as f64
        };
        Self { pass_name: pass_name.to_string(), wall_time, gates_before: before, gates_after: after, reduction_fraction }
    }

    /// JSON object with the pass name, milliseconds and before/after gate histograms.
    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(StatsJson {
            name: &self.pass_name,
            ms: self.wall_time.as_secs_f64() * 1e3,
            before: &self.gates_before.histogram,
            after: &self.gates_after.histogram,
            total_before: self.gates_before.total_gates,
            total_after: self.gates_after.total_gates,
            reduction_fraction: self.reduction_fraction,
        })
        .expect("stats serialize")
    }
}

impl fmt::Display for PassStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} -> {} gates ({:.1}% reduction) in {:.3} ms",
            self.pass_name,
            self.gates_before.total_gates,
            self.gates_after.total_gates,
            self.reduction_fraction * 100.0,
            self.wall_time.as_secs_f64() * 1e3
        )
    }
}

/// Serializes a list of pass statistics as a JSON array.
pub fn stats_report(stats: &[PassStats]) -> String {
    let values: Vec<serde_json::Value> = stats.iter().map(PassStats::to_json_value).collect();
    serde_json::to_string_pretty(&values).expect("stats serialize")
}

/// Optimization level; each level is a fixed sequence of passes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OptLevel(u8);

impl OptLevel {
    pub const O0: OptLevel = OptLevel(0);
    pub const O1: OptLevel = OptLevel(1);

    pub fn new(level: u8) -> Result<Self, PassError> {
        match level {
            0 | 1 => Ok(OptLevel(level)),
            _ => Err(PassError::UnknownOptLevel(level)),
        }
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn passes(self) -> &'static [&'static str] {
        match self.0 {
            0 => &[],
            _ => &["rotation-folding", "single-qubit-gate-merging", "circuit-optimizer"],
        }
    }
}

/// Registry of passes by name. Starts with the built-in passes; more can be registered.
#[derive(Clone)]
pub struct PassManager {
    passes: BTreeMap<String, Arc<dyn Pass>>,
}

impl Default for PassManager {
    fn default() -> Self {
        Self::new()
    }
}

impl PassManager {
    pub fn new() -> Self {
        let mut pm = Self { passes: BTreeMap::new() };
        pm.register(Arc::new(CircuitOptimizer));
        pm.register(Arc::new(RotationFolding));
        pm.register(Arc::new(SingleQubitGateMerging));
        pm
    }

    /// Adds or replaces a pass under its own name.
    pub fn register(&mut self, pass: Arc<dyn Pass>) {
        self.passes.insert(pass.name().to_string(), pass);
    }

    pub fn names(&self) -> Vec<&str> {
        self.passes.keys().map(String::as_str).collect()
    }

    pub fn get(&self, name: &str) -> Result<&Arc<dyn Pass>, PassError> {
        self.passes.get(name).ok_or_else(|| PassError::UnknownPass {
            name: name.to_string(),
            available: self.names().join(", "),
        })
    }

    pub fn run_pass(&self, name: &str, circuit: &Circuit) -> Result<(Circuit, PassStats), PassError> {
        let pass = self.get(name)?;
        let before = circuit.flatten();
        let start = Instant::now();
        let after = pass.apply(&before);
        let elapsed = start.elapsed();
        let stats = PassStats::new(name, elapsed, CircuitStats::of(&before), CircuitStats::of(&after));
        Ok((Circuit::from_instructions(circuit.name.clone(), after), stats))
    }

    /// Runs the named passes in order. Names are checked before anything runs.
    pub fn run_sequence<S: AsRef<str>>(&self, names: &[S], circuit: &Circuit) -> Result<(Circuit, Vec<PassStats>), PassError> {
        for n in names {
            self.get(n.as_ref())?;
        }
        let mut current = circuit.flattened();
        let mut all = Vec::with_capacity(names.len());
        for n in names {
            let (next, stats) = self.run_pass(n.as_ref(), &current)?;
            current = next;
            all.push(stats);
        }
        Ok((current, all))
    }

    /// Runs the level's pass sequence. Level 0 returns the circuit unchanged.
    pub fn run_level(&self, level: OptLevel, circuit: &Circuit) -> Result<(Circuit, Vec<PassStats>), PassError> {
        if level.passes().is_empty() {
            return Ok((circuit.clone(), Vec::new()));
        }
        self.run_sequence(level.passes(), circuit)
    }
}

/// Wraps an angle into `(-π, π]`.
pub(crate) fn wrap_angle(a: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

pub(crate) fn is_zero_angle(a: f64) -> bool {
    wrap_angle(a).abs() < ANGLE_TOL
}

/// Index of the next live instruction after `i` touching `qubit`.
pub(crate) fn next_on(insts: &[Option<Instruction>], i: usize, qubit: usize) -> Option<usize> {
    (i + 1..insts.len()).find(|&j| insts[j].as_ref().is_some_and(|x| x.touches(qubit)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::to_unitary;

    #[test]
    fn level_table() {
        assert!(OptLevel::O0.passes().is_empty());
        assert_eq!(OptLevel::O1.passes(), ["rotation-folding", "single-qubit-gate-merging", "circuit-optimizer"]);
        assert_eq!(OptLevel::new(2), Err(PassError::UnknownOptLevel(2)));
    }

    #[test]
    fn level0_unchanged() {
        let c = Circuit::from_instructions("c", [Instruction::h(0), Instruction::h(0)]);
        let (out, stats) = PassManager::new().run_level(OptLevel::O0, &c).unwrap();
        assert_eq!(out, c);
        assert!(stats.is_empty());
    }

    #[test]
    fn level1_cancels_t_chain() {
        use GateKind::{Tdg, T};
        let c = Circuit::from_instructions(
            "c",
            [Instruction::one(T, 0), Instruction::one(T, 0), Instruction::one(Tdg, 0), Instruction::one(Tdg, 0), Instruction::measure(0)],
        );
        let (out, stats) = PassManager::new().run_level(OptLevel::O1, &c).unwrap();
        assert_eq!(out.flatten(), vec![Instruction::measure(0)]);
        assert_eq!(stats.len(), 3);
        let total: f64 = 1.0 - stats.last().unwrap().gates_after.total_gates as f64 / stats[0].gates_before.total_gates as f64;
        assert!((total - 0.8).abs() < 1e-12);
    }

    #[test]
    fn unknown_pass() {
        let err = PassManager::new().run_pass("voqc", &Circuit::new("c")).unwrap_err();
        assert!(matches!(err, PassError::UnknownPass { .. }));
        assert!(err.to_string().contains("circuit-optimizer"));
    }

    #[test]
    fn stats_fields() {
        let c = Circuit::from_instructions("c", [Instruction::h(0), Instruction::h(0), Instruction::x(1)]);
        let (out, s) = PassManager::new().run_pass("circuit-optimizer", &c).unwrap();
        assert_eq!(out.len(), 1);
        assert!((s.reduction_fraction - 2.0 / 3.0).abs() < 1e-12);
        let v = s.to_json_value();
        assert_eq!(v["name"], "circuit-optimizer");
        assert_eq!(v["before"]["H"], 2);
        assert_eq!(v["after"]["X"], 1);
        assert!(v["ms"].as_f64().unwrap() >= 0.0);
        let (_, empty) = PassManager::new().run_pass("circuit-optimizer", &Circuit::new("e")).unwrap();
        assert_eq!(empty.reduction_fraction, 0.0);
    }

    struct Drop1;
    impl Pass for Drop1 {
        fn name(&self) -> &str {
            "drop-identity-rz"
        }
        fn apply(&self, insts: &[Instruction]) -> Vec<Instruction> {
            insts.iter().filter(|i| !(i.kind == GateKind::Rz && i.params[0] == 0.0)).cloned().collect()
        }
    }

    #[test]
    fn user_passes_register() {
        let mut pm = PassManager::new();
        pm.register(Arc::new(Drop1));
        let c = Circuit::from_instructions("c", [Instruction::rz(0, 0.0), Instruction::h(0)]);
        let (out, _) = pm.run_sequence(&["drop-identity-rz"], &c).unwrap();
        assert_eq!(to_unitary(&out, 1).unwrap(), to_unitary(&c, 1).unwrap());
        assert_eq!(out.len(), 1);
    }

    #[test]
    fn wrap() {
        use std::f64::consts::PI;
        assert!(is_zero_angle(2.0 * PI));
        assert!(is_zero_angle(-4.0 * PI));
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
    }
}

//! Mapping logical circuits onto hardware connectivity.
//!
//! Routing keeps measurement results on their logical classical bits: every placed `Measure`
//! carries an explicit clbit equal to its logical qubit (unless it already had one), so the
//! counts keys of a placed circuit read the same as the logical circuit's.

mod graph;
mod sabre;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use graph::{CouplingGraph, BUILTIN_GRAPHS};
pub use sabre::SabreParams;

use crate::ir::{Circuit, GateKind, Instruction, Node};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlacementError {
    #[error("circuit needs {needed} qubit(s) but the coupling graph has {available}")]
    GraphTooSmall { needed: usize, available: usize },
    #[error("coupling graph is not connected over the qubits the circuit uses")]
    DisconnectedGraph,
    #[error("physical qubit {0} appears twice in the qubit map")]
    DuplicatePhysicalIndex(usize),
    #[error("qubit map has {got} entries but the circuit uses {needed} qubit(s)")]
    MapTooShort { needed: usize, got: usize },
    #[error("qubit map entry {index} is outside a {available}-qubit device")]
    MapOutOfRange { index: usize, available: usize },
    #[error("invalid coupling graph: {0}")]
    InvalidGraph(String),
    #[error("unknown coupling graph '{0}' (built in: vigo, ourense, yorktown, falcon27; or a JSON file)")]
    UnknownGraph(String),
    #[error("unknown placement strategy '{0}' (available: ssp, sabre)")]
    UnknownStrategy(String),
    #[error("instruction {index} ({gate}) acts on uncoupled qubits {a} and {b}")]
    UncoupledGate { index: usize, gate: String, a: usize, b: usize },
    #[error("{0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    /// Shortest-path swapping with the permutation carried forward.
    #[default]
    Ssp,
    Sabre,
}

impl FromStr for Strategy {
    type Err = PlacementError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ssp" | "swap-shortest-path" => Ok(Strategy::Ssp),
            "sabre" => Ok(Strategy::Sabre),
            _ => Err(PlacementError::UnknownStrategy(s.to_string())),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Ssp => "swap-shortest-path",
            Strategy::Sabre => "sabre",
        })
    }
}

/// Routed circuit on physical qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct PlacementResult {
    pub circuit: Circuit,
    /// Physical position of each logical qubit before the first instruction.
    pub initial_map: Vec<usize>,
    /// Physical position of each logical qubit after the last instruction.
    pub final_map: Vec<usize>,
    /// Swaps inserted by routing.
    pub added_two_qubit_gates: usize,
}

/// Bidirectional logical/physical assignment over every physical qubit. Logical indices at or
/// above the circuit width are idle ancillas.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Layout {
    pub l2p: Vec<usize>,
    pub p2l: Vec<usize>,
}

impl Layout {
    /// Extends `map` (logical -> physical) to a full permutation, filling free physical qubits
    /// in ascending order.
    pub fn from_partial(map: &[usize], n_phys: usize) -> Self {
        let mut used = vec![false; n_phys];
        for &p in map {
            used[p] = true;
        }
        let mut l2p = map.to_vec();
        l2p.extend((0..n_phys).filter(|&p| !used[p]));
        let mut p2l = vec![0; n_phys];
        for (l, &p) in l2p.iter().enumerate() {
            p2l[p] = l;
        }
        Self { l2p, p2l }
    }

    pub fn swap_physical(&mut self, a: usize, b: usize) {
        let (la, lb) = (self.p2l[a], self.p2l[b]);
        self.p2l.swap(a, b);
        self.l2p[la] = b;
        self.l2p[lb] = a;
    }
}

/// Rewrites a logical instruction onto physical qubits, pinning measurement clbits.
pub(crate) fn to_physical(inst: &Instruction, layout: &Layout) -> Instruction {
    let mut out = inst.map_qubits(|q| layout.l2p[q]);
    if inst.kind == GateKind::Measure {
        out.clbit = Some(inst.clbit.unwrap_or(inst.qubits[0]));
    }
    out
}

fn check_map(map: &[usize], needed: usize, available: usize) -> Result<(), PlacementError> {
    if map.len() < needed {
        return Err(PlacementError::MapTooShort { needed, got: map.len() });
    }
    let mut seen = std::collections::HashSet::new();
    for &p in map {
        if p >= available {
            return Err(PlacementError::MapOutOfRange { index: p, available });
        }
        if !seen.insert(p) {
            return Err(PlacementError::DuplicatePhysicalIndex(p));
        }
    }
    Ok(())
}

/// Routes `circuit` onto `graph`. Without `initial_map`, ssp starts from the identity and sabre
/// searches for a starting map.
pub fn place(
    circuit: &Circuit,
    graph: &CouplingGraph,
    strategy: Strategy,
    initial_map: Option<&[usize]>,
) -> Result<PlacementResult, PlacementError> {
    place_with(circuit, graph, strategy, initial_map, &SabreParams::default())
}

pub fn place_with(
    circuit: &Circuit,
    graph: &CouplingGraph,
    strategy: Strategy,
    initial_map: Option<&[usize]>,
    params: &SabreParams,
) -> Result<PlacementResult, PlacementError> {
    let insts = circuit.flatten();
    let n_log = circuit.num_qubits();
    let n_phys = graph.num_qubits();
    if n_log > n_phys {
        return Err(PlacementError::GraphTooSmall { needed: n_log, available: n_phys });
    }
    if let Some(m) = initial_map {
        check_map(m, n_log, n_phys)?;
    }
    let start = Layout::from_partial(initial_map.map_or(&[][..], |m| &m[..n_log]), n_phys);
    let two_qubit: Vec<usize> = insts.iter().filter(|i| i.qubits.len() == 2).flat_map(|i| i.qubits.iter().copied()).collect();
    if !two_qubit.is_empty() {
        let comp = graph.components();
        let first = comp[start.l2p[two_qubit[0]]];
        let spread = two_qubit.iter().any(|&q| comp[start.l2p[q]] != first);
        // Sabre may pick a new starting map, but only inside one component.
        let whole_graph_split = comp.iter().any(|&c| c != comp[0]);
        if spread || (strategy == Strategy::Sabre && initial_map.is_none() && whole_graph_split) {
            return Err(PlacementError::DisconnectedGraph);
        }
    }
    let (start, routed) = match strategy {
        Strategy::Ssp => (start.clone(), route_ssp(&insts, graph, start)),
        Strategy::Sabre => {
            let start = if initial_map.is_none() { sabre::initial_layout(&insts, graph, start, params) } else { start };
            (start.clone(), sabre::route(&insts, graph, start, params))
        }
    };
    Ok(PlacementResult {
        circuit: Circuit::from_instructions(circuit.name.clone(), routed.instructions),
        initial_map: start.l2p[..n_log].to_vec(),
        final_map: routed.layout.l2p[..n_log].to_vec(),
        added_two_qubit_gates: routed.swaps,
    })
}

pub(crate) struct Routed {
    pub instructions: Vec<Instruction>,
    pub layout: Layout,
    pub swaps: usize,
}

/// Moves the first operand along a shortest path until it neighbors the second, emitting the
/// swaps and updating `layout`. Returns the number of swaps.
pub(crate) fn walk_into_range(a: usize, b: usize, graph: &CouplingGraph, layout: &mut Layout, out: &mut Vec<Instruction>) -> usize {
    let path = graph.shortest_path(layout.l2p[a], layout.l2p[b]).expect("operands share a component");
    let hops = path.len().saturating_sub(2);
    for k in 0..hops {
        out.push(Instruction::swap(path[k], path[k + 1]));
        layout.swap_physical(path[k], path[k + 1]);
    }
    hops
}

fn route_ssp(insts: &[Instruction], graph: &CouplingGraph, mut layout: Layout) -> Routed {
    let mut out = Vec::with_capacity(insts.len());
    let mut swaps = 0;
    for inst in insts {
        if inst.qubits.len() == 2 && !graph.connected(layout.l2p[inst.qubits[0]], layout.l2p[inst.qubits[1]]) {
            swaps += walk_into_range(inst.qubits[0], inst.qubits[1], graph, &mut layout, &mut out);
        }
        out.push(to_physical(inst, &layout));
    }
    Routed { instructions: out, layout, swaps }
}

/// Checks that every two-qubit instruction acts on a coupled pair.
pub fn verify(circuit: &Circuit, graph: &CouplingGraph) -> Result<(), PlacementError> {
    for (index, inst) in circuit.iter().enumerate() {
        if inst.qubits.len() == 2 && !graph.connected(inst.qubits[0], inst.qubits[1]) {
            return Err(PlacementError::UncoupledGate { index, gate: inst.to_string(), a: inst.qubits[0], b: inst.qubits[1] });
        }
        if inst.qubits.iter().any(|&q| q >= graph.num_qubits()) {
            return Err(PlacementError::GraphTooSmall { needed: inst.qubits.iter().max().map_or(0, |m| m + 1), available: graph.num_qubits() });
        }
    }
    Ok(())
}

/// Relabels logical qubit `i` as `map[i]`, keeping the circuit's tree shape.
pub fn apply_qubit_map(circuit: &Circuit, map: &[usize]) -> Result<Circuit, PlacementError> {
    let needed = circuit.num_qubits();
    if map.len() < needed {
        return Err(PlacementError::MapTooShort { needed, got: map.len() });
    }
    let mut seen = std::collections::HashSet::new();
    for &p in map {
        if !seen.insert(p) {
            return Err(PlacementError::DuplicatePhysicalIndex(p));
        }
    }
    fn relabel(c: &Circuit, map: &[usize]) -> Circuit {
        let children = c
            .children
            .iter()
            .map(|n| match n {
                Node::Inst(i) => {
                    let mut out = i.map_qubits(|q| map[q]);
                    if i.kind == GateKind::Measure {
                        out.clbit = Some(i.clbit.unwrap_or(i.qubits[0]));
                    }
                    Node::Inst(out)
                }
                Node::Sub(s) => Node::Sub(relabel(s, map)),
            })
            .collect();
        Circuit { name: c.name.clone(), children }
    }
    Ok(relabel(circuit, map))
}

/// Parses `"5,6"` into a qubit map.
pub fn parse_qubit_map(text: &str) -> Result<Vec<usize>, PlacementError> {
    text.split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|_| PlacementError::InvalidGraph(format!("bad qubit map entry '{s}'"))))
        .collect()
}

//! SABRE: swap selection by a front-layer distance heuristic with decayed lookahead.

use std::collections::VecDeque;

use super::{to_physical, walk_into_range, CouplingGraph, Layout, Routed};
use crate::ir::Instruction;

#[derive(Debug, Clone, PartialEq)]
pub struct SabreParams {
    /// Two-qubit gates beyond the front layer considered for lookahead.
    pub extended_set_size: usize,
    /// Lookahead weight.
    pub extended_set_weight: f64,
    pub decay_delta: f64,
    /// Swaps between decay resets.
    pub decay_reset_interval: usize,
}

impl Default for SabreParams {
    fn default() -> Self {
        Self { extended_set_size: 20, extended_set_weight: 0.5, decay_delta: 0.001, decay_reset_interval: 5 }
    }
}

struct Dag {
    succs: Vec<Vec<usize>>,
    n_preds: Vec<usize>,
}

impl Dag {
    fn new(insts: &[Instruction]) -> Self {
        let mut last: Vec<Option<usize>> = Vec::new();
        let mut succs = vec![Vec::new(); insts.len()];
        let mut n_preds = vec![0; insts.len()];
        for (k, inst) in insts.iter().enumerate() {
            let mut preds: Vec<usize> = Vec::new();
            for &q in &inst.qubits {
                if last.len() <= q {
                    last.resize(q + 1, None);
                }
                if let Some(p) = last[q] {
                    if !preds.contains(&p) {
                        preds.push(p);
                    }
                }
                last[q] = Some(k);
            }
            n_preds[k] = preds.len();
            for p in preds {
                succs[p].push(k);
            }
        }
        Self { succs, n_preds }
    }
}

pub(crate) fn route(insts: &[Instruction], graph: &CouplingGraph, mut layout: Layout, params: &SabreParams) -> Routed {
    let dist = graph.distance_matrix();
    let dag = Dag::new(insts);
    let mut remaining = dag.n_preds.clone();
    let mut front: Vec<usize> = (0..insts.len()).filter(|&k| remaining[k] == 0).collect();
    let mut out = Vec::with_capacity(insts.len());
    let mut swaps = 0;
    let mut decay = vec![1.0f64; graph.num_qubits()];
    let mut swaps_since_reset = 0;
    let mut stalled = 0;
    let stall_limit = 3 * graph.num_qubits() + 10;
    let d = |layout: &Layout, g: usize| {
        let q = &insts[g].qubits;
        dist[layout.l2p[q[0]]][layout.l2p[q[1]]] as f64
    };

    while !front.is_empty() {
        // Execute everything that can run.
        let mut progressed = true;
        let mut any = false;
        while progressed {
            progressed = false;
            let mut next = Vec::new();
            for &g in &front {
                let inst = &insts[g];
                let ready = inst.qubits.len() < 2 || graph.connected(layout.l2p[inst.qubits[0]], layout.l2p[inst.qubits[1]]);
                if ready {
                    out.push(to_physical(inst, &layout));
                    progressed = true;
                    for &s in &dag.succs[g] {
                        remaining[s] -= 1;
                        if remaining[s] == 0 {
                            next.push(s);
                        }
                    }
                } else {
                    next.push(g);
                }
            }
            next.sort_unstable();
            front = next;
            any |= progressed;
        }
        if front.is_empty() {
            break;
        }
        if any {
            decay.iter_mut().for_each(|x| *x = 1.0);
            swaps_since_reset = 0;
            stalled = 0;
        }
        if stalled >= stall_limit {
            // Guarantee progress: walk the oldest blocked gate into range.
            let g = front[0];
            swaps += walk_into_range(insts[g].qubits[0], insts[g].qubits[1], graph, &mut layout, &mut out);
            stalled = 0;
            continue;
        }

        let extended = extended_set(&front, &dag, &remaining, insts, params.extended_set_size);
        let mut candidates: Vec<(usize, usize)> = front
            .iter()
            .flat_map(|&g| insts[g].qubits.iter().map(|&q| layout.l2p[q]))
            .flat_map(|p| graph.neighbors(p).iter().map(move |&n| (p.min(n), p.max(n))))
            .collect();
        candidates.sort_unstable();
        candidates.dedup();

        let mut best: Option<((usize, usize), f64)> = None;
        for &(a, b) in &candidates {
            let mut trial = layout.clone();
            trial.swap_physical(a, b);
            let front_cost: f64 = front.iter().map(|&g| d(&trial, g)).sum::<f64>() / front.len() as f64;
            let ext_cost = if extended.is_empty() {
                0.0
            } else {
                params.extended_set_weight * extended.iter().map(|&g| d(&trial, g)).sum::<f64>() / extended.len() as f64
            };
            let score = decay[a].max(decay[b]) * (front_cost + ext_cost);
            if best.is_none_or(|(_, s)| score < s) {
                best = Some(((a, b), score));
            }
        }
        let ((a, b), _) = best.expect("a blocked gate has neighboring qubits");
        out.push(Instruction::swap(a, b));
        layout.swap_physical(a, b);
        swaps += 1;
        stalled += 1;
        decay[a] += params.decay_delta;
        decay[b] += params.decay_delta;
        swaps_since_reset += 1;
        if swaps_since_reset >= params.decay_reset_interval {
            decay.iter_mut().for_each(|x| *x = 1.0);
            swaps_since_reset = 0;
        }
    }
    Routed { instructions: out, layout, swaps }
}

/// Upcoming two-qubit gates after the front layer, in breadth-first order.
fn extended_set(front: &[usize], dag: &Dag, remaining: &[usize], insts: &[Instruction], limit: usize) -> Vec<usize> {
    let mut pending = remaining.to_vec();
    let mut queue: VecDeque<usize> = front.iter().copied().collect();
    let mut out = Vec::new();
    while let Some(g) = queue.pop_front() {
        for &s in &dag.succs[g] {
            pending[s] -= 1;
            if pending[s] == 0 {
                if insts[s].qubits.len() == 2 {
                    out.push(s);
                    if out.len() >= limit {
                        return out;
                    }
                }
                queue.push_back(s);
            }
        }
    }
    out
}

/// Forward, backward and forward traversal: the layout reached after routing the circuit and
/// then its reverse becomes the starting layout.
pub(crate) fn initial_layout(insts: &[Instruction], graph: &CouplingGraph, start: Layout, params: &SabreParams) -> Layout {
    let forward = route(insts, graph, start, params).layout;
    let reversed: Vec<Instruction> = insts.iter().rev().cloned().collect();
    route(&reversed, graph, forward, params).layout
}

#[cfg(test)]
mod tests {
    use super::super::{place, verify, Strategy};
    use super::*;
    use crate::ir::Circuit;

    #[test]
    fn routes_random_circuit_validly() {
        use rand::{Rng, SeedableRng};
        let g = CouplingGraph::builtin("falcon27").unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut c = Circuit::new("r");
        for _ in 0..60 {
            let a = rng.random_range(0..10);
            let mut b = rng.random_range(0..10);
            while b == a {
                b = rng.random_range(0..10);
            }
            c.push(Instruction::cx(a, b));
        }
        let r = place(&c, &g, Strategy::Sabre, None).unwrap();
        verify(&r.circuit, &g).unwrap();
        assert_eq!(r.circuit.iter().filter(|i| i.kind == crate::ir::GateKind::CX).count(), 60);
    }

    #[test]
    fn deterministic() {
        let g = CouplingGraph::builtin("vigo").unwrap();
        let c = Circuit::from_instructions("c", [Instruction::cx(0, 4), Instruction::cx(2, 3), Instruction::cx(0, 2)]);
        let a = place(&c, &g, Strategy::Sabre, None).unwrap();
        let b = place(&c, &g, Strategy::Sabre, None).unwrap();
        assert_eq!(a, b);
    }
}

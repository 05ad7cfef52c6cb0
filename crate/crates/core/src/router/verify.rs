//! Semantic check for routed circuits.
//!
//! Replays the physical schedule while tracking which logical qubit sits on
//! each physical qubit. Every non-inserted op must consume, in order, the
//! next pending gate of each logical qubit it touches, two-qubit ops must
//! sit on topology edges, and the inserted swaps must reproduce the recorded
//! final map. Inserted swaps permute the tracking map; source gates do not.

use crate::circuit::{Circuit, GateKind};
use crate::router::RoutedCircuit;
use crate::topology::TopologyGraph;

/// What a logical qubit expects next, derived from the source circuit.
#[derive(Debug, Clone, PartialEq)]
enum Expected {
    Single(GateKind),
    /// kind, partner logical qubit, slot of this qubit in the operand list
    Pair(GateKind, usize, usize),
}

pub fn verify_routing(c: &Circuit, g: &TopologyGraph, rc: &RoutedCircuit) -> bool {
    if rc.num_logical != c.num_qubits() || rc.num_physical != g.num_vertices() {
        return false;
    }
    let n_log = c.num_qubits();
    let n_phys = g.num_vertices();
    if n_phys < n_log {
        return false;
    }

    // Per-logical-qubit queues of expected gates, program order. Barriers are
    // scheduling-transparent and never scheduled; measurements commute to the
    // end of the schedule, so they are tracked as per-qubit counts instead.
    let mut queues: Vec<std::collections::VecDeque<Expected>> =
        vec![std::collections::VecDeque::new(); n_log];
    let mut expected_measures = vec![0usize; n_log];
    for gate in c.gates() {
        match gate.kind {
            GateKind::Barrier => {}
            GateKind::Measure => expected_measures[gate.qubits[0]] += 1,
            kind if gate.qubits.len() == 2 => {
                let (a, b) = (gate.qubits[0], gate.qubits[1]);
                queues[a].push_back(Expected::Pair(kind, b, 0));
                queues[b].push_back(Expected::Pair(kind, a, 1));
            }
            kind => queues[gate.qubits[0]].push_back(Expected::Single(kind)),
        }
    }

    // phys -> logical, sequential start; padding slots carry None.
    let mut occupant: Vec<Option<usize>> = (0..n_phys).map(|p| (p < n_log).then_some(p)).collect();

    for op in &rc.ops {
        match (op.inserted, op.kind) {
            (true, GateKind::Swap) => {
                let (a, b) = (op.qubits[0], op.qubits[1]);
                if a == b || a >= n_phys || b >= n_phys || !g.has_edge(a, b) {
                    return false;
                }
                occupant.swap(a, b);
            }
            (true, _) => return false,
            (false, kind) => {
                if op.qubits.len() != kind.arity() {
                    return false;
                }
                if kind.arity() == 2 {
                    let (pa, pb) = (op.qubits[0], op.qubits[1]);
                    if pa >= n_phys || pb >= n_phys || !g.has_edge(pa, pb) {
                        return false;
                    }
                    let (Some(la), Some(lb)) = (occupant[pa], occupant[pb]) else {
                        return false;
                    };
                    if queues[la].pop_front() != Some(Expected::Pair(kind, lb, 0)) {
                        return false;
                    }
                    if queues[lb].pop_front() != Some(Expected::Pair(kind, la, 1)) {
                        return false;
                    }
                } else {
                    let p = op.qubits[0];
                    if p >= n_phys {
                        return false;
                    }
                    let Some(l) = occupant[p] else {
                        return false;
                    };
                    if kind == GateKind::Measure {
                        if expected_measures[l] == 0 {
                            return false;
                        }
                        expected_measures[l] -= 1;
                    } else if queues[l].pop_front() != Some(Expected::Single(kind)) {
                        return false;
                    }
                }
            }
        }
    }

    if queues.iter().any(|q| !q.is_empty()) || expected_measures.iter().any(|&m| m != 0) {
        return false;
    }

    // The recorded final map must match replaying the inserted swaps, and the
    // occupant table must agree with it.
    for (p, &occ) in occupant.iter().enumerate() {
        if rc.final_map.logical_at(p) != occ {
            return false;
        }
    }
    true
}

//! SWAP-insertion router: the depth oracle mapping (topology, circuit) to a
//! hardware-legal physical circuit.
//!
//! Logical qubits start on the physical qubits of the same index. Blocked
//! two-qubit gates wait in a front layer while candidate SWAPs are scored by
//! front-layer distance plus a weighted lookahead window, with a per-qubit
//! decay factor discouraging ping-ponging the same qubits. Equal-cost swaps
//! are broken by a seeded RNG, so routing is deterministic per seed.

mod verify;

pub use verify::verify_routing;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::circuit::{Circuit, GateKind};
use crate::topology::{DistanceMatrix, TopologyGraph};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RouteError {
    #[error("circuit needs {needed} qubits but topology has {available}")]
    TooFewPhysicalQubits { needed: usize, available: usize },
    #[error("logical qubits {a} and {b} interact but start in disconnected components")]
    Unroutable { a: usize, b: usize },
}

/// Tunables for the routing heuristic. Defaults follow the documented
/// lookahead/decay scheme; `swap_as_one` switches SWAP accounting from the
/// 3-cx decomposition to a single gate.
#[derive(Debug, Clone, PartialEq)]
pub struct RouterOptions {
    pub swap_as_one: bool,
    pub extended_window: usize,
    pub extended_weight: f64,
    pub decay_increment: f64,
    pub decay_reset: usize,
    /// Swaps attempted without progress before the shortest-path release
    /// valve fires. `None` picks `max(20, 10 * vertices)`.
    pub attempt_limit: Option<usize>,
}

impl Default for RouterOptions {
    fn default() -> Self {
        Self {
            swap_as_one: false,
            extended_window: 20,
            extended_weight: 0.5,
            decay_increment: 0.001,
            decay_reset: 5,
            attempt_limit: None,
        }
    }
}

/// Bijective logical-to-physical assignment. Physical qubits beyond the
/// circuit width host padding slots so swaps stay total.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QubitMap {
    log_to_phys: Vec<usize>,
    phys_to_log: Vec<usize>,
    num_logical: usize,
}

impl QubitMap {
    /// Sequential layout: logical qubit `k` starts on physical qubit `k`.
    pub fn sequential(num_logical: usize, num_physical: usize) -> Result<Self, RouteError> {
        if num_physical < num_logical {
            return Err(RouteError::TooFewPhysicalQubits {
                needed: num_logical,
                available: num_physical,
            });
        }
        Ok(Self {
            log_to_phys: (0..num_physical).collect(),
            phys_to_log: (0..num_physical).collect(),
            num_logical,
        })
    }

    pub fn num_logical(&self) -> usize {
        self.num_logical
    }

    pub fn phys_of(&self, logical: usize) -> usize {
        self.log_to_phys[logical]
    }

    /// The real logical qubit on `phys`, if any (padding slots yield None).
    pub fn logical_at(&self, phys: usize) -> Option<usize> {
        let l = self.phys_to_log[phys];
        (l < self.num_logical).then_some(l)
    }

    /// Exchange whatever sits on the two physical qubits.
    pub fn swap_physical(&mut self, a: usize, b: usize) {
        let (la, lb) = (self.phys_to_log[a], self.phys_to_log[b]);
        self.phys_to_log[a] = lb;
        self.phys_to_log[b] = la;
        self.log_to_phys[lb] = a;
        self.log_to_phys[la] = b;
    }

    /// Mapping restricted to real logical qubits, as `logical -> physical`.
    pub fn assignment(&self) -> Vec<usize> {
        self.log_to_phys[..self.num_logical].to_vec()
    }
}

/// Sequential initial layout for `c` on `g` (logical k on physical k).
pub fn initial_layout(c: &Circuit, g: &TopologyGraph) -> Result<QubitMap, RouteError> {
    QubitMap::sequential(c.num_qubits(), g.num_vertices())
}

/// One operation of the physical schedule. `inserted` marks routing SWAPs
/// as opposed to gates present in the source program.
#[derive(Debug, Clone, PartialEq)]
pub struct RoutedOp {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    pub inserted: bool,
}

/// Physical schedule with depth and gate accounting.
#[derive(Debug, Clone, PartialEq)]
pub struct RoutedCircuit {
    pub ops: Vec<RoutedOp>,
    pub num_physical: usize,
    pub num_logical: usize,
    pub depth: usize,
    pub total_gates: usize,
    pub swap_count: usize,
    pub initial_map: QubitMap,
    pub final_map: QubitMap,
    pub swap_as_one: bool,
}

impl RoutedCircuit {
    /// OpenQASM text of the physical schedule; SWAPs are decomposed to
    /// 3 cx unless accounting counts them as single gates.
    pub fn to_qasm(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
        let _ = writeln!(out, "qreg q[{}];", self.num_physical);
        if self.ops.iter().any(|op| op.kind == GateKind::Measure) {
            let _ = writeln!(out, "creg c[{}];", self.num_physical);
        }
        for op in &self.ops {
            match op.kind {
                GateKind::Swap if !self.swap_as_one => {
                    let (a, b) = (op.qubits[0], op.qubits[1]);
                    let _ = writeln!(out, "cx q[{a}],q[{b}];");
                    let _ = writeln!(out, "cx q[{b}],q[{a}];");
                    let _ = writeln!(out, "cx q[{a}],q[{b}];");
                }
                GateKind::Swap => {
                    let _ = writeln!(out, "swap q[{}],q[{}];", op.qubits[0], op.qubits[1]);
                }
                GateKind::Rz(angle) => {
                    let _ = writeln!(out, "rz({:?}) q[{}];", angle, op.qubits[0]);
                }
                GateKind::Cx => {
                    let _ = writeln!(out, "cx q[{}],q[{}];", op.qubits[0], op.qubits[1]);
                }
                GateKind::Measure => {
                    let _ = writeln!(out, "measure q[{0}] -> c[{0}];", op.qubits[0]);
                }
                GateKind::Barrier => {}
                _ => {
                    let name = match op.kind {
                        GateKind::H => "h",
                        GateKind::X => "x",
                        GateKind::S => "s",
                        GateKind::T => "t",
                        _ => unreachable!(),
                    };
                    let _ = writeln!(out, "{name} q[{}];", op.qubits[0]);
                }
            }
        }
        out
    }
}

/// Lookahead cost of the current placement, scaled by the decay of the swap
/// under consideration: front-layer distance sum plus `w / |ext|` times the
/// extended-window distance sum.
pub fn heuristic_cost(
    front: &[(usize, usize)],
    extended: &[(usize, usize)],
    map: &QubitMap,
    dist: &DistanceMatrix,
    ext_weight: f64,
    decay: &[f64],
    swap: (usize, usize),
) -> f64 {
    let pair_dist = |&(a, b): &(usize, usize)| dist.get(map.phys_of(a), map.phys_of(b)) as f64;
    let mut cost: f64 = front.iter().map(pair_dist).sum();
    if !extended.is_empty() {
        let ext_sum: f64 = extended.iter().map(pair_dist).sum();
        cost += ext_weight * ext_sum / extended.len() as f64;
    }
    cost * decay[swap.0].max(decay[swap.1])
}

struct RoutingState<'a> {
    circuit: &'a Circuit,
    graph: &'a TopologyGraph,
    dist: DistanceMatrix,
    opts: &'a RouterOptions,
    dag: crate::circuit::CircuitDag,
    layout: QubitMap,
    remaining_preds: Vec<usize>,
    /// Blocked two-qubit DAG nodes with their logical pair.
    front: Vec<(usize, (usize, usize))>,
    /// Logical pairs of upcoming two-qubit gates, capped at the window size.
    extended: Vec<(usize, usize)>,
    ops: Vec<RoutedOp>,
    decay: Vec<f64>,
    decay_round: usize,
    rng: ChaCha8Rng,
}

impl<'a> RoutingState<'a> {
    fn emit_original(&mut self, node: usize) {
        let gate = &self.circuit.gates()[self.dag.gate_index(node)];
        let qubits = gate
            .qubits
            .iter()
            .map(|&q| self.layout.phys_of(q))
            .collect();
        self.ops.push(RoutedOp {
            kind: gate.kind,
            qubits,
            inserted: false,
        });
    }

    /// Process nodes whose dependencies are satisfied: emit single-qubit and
    /// already-adjacent two-qubit gates, park blocked ones in the front layer.
    fn advance(&mut self, ready: Vec<usize>) {
        let mut queue = std::collections::VecDeque::from(ready);
        while let Some(node) = queue.pop_front() {
            let gate = &self.circuit.gates()[self.dag.gate_index(node)];
            if gate.kind.arity() == 2 {
                let (a, b) = (gate.qubits[0], gate.qubits[1]);
                if !self
                    .graph
                    .has_edge(self.layout.phys_of(a), self.layout.phys_of(b))
                {
                    self.front.push((node, (a, b)));
                    continue;
                }
            }
            self.emit_original(node);
            for &succ in self.dag.successors(node) {
                self.remaining_preds[succ] -= 1;
                if self.remaining_preds[succ] == 0 {
                    queue.push_back(succ);
                }
            }
        }
    }

    /// Front gates that became adjacent, removed from the front layer.
    fn take_routable(&mut self) -> Vec<usize> {
        let mut routable = Vec::new();
        self.front.retain(|&(node, (a, b))| {
            let adjacent = self
                .graph
                .has_edge(self.layout.phys_of(a), self.layout.phys_of(b));
            if adjacent {
                routable.push(node);
            }
            !adjacent
        });
        routable
    }

    /// Walk successors of the front to fill the lookahead window with the
    /// next unresolved two-qubit interactions. `remaining_preds` is used as
    /// scratch and restored before returning.
    fn rebuild_extended(&mut self) {
        self.extended.clear();
        if self.opts.extended_window == 0 {
            return;
        }
        let mut decremented: Vec<(usize, usize)> = Vec::new();
        let mut to_visit: Vec<usize> = self.front.iter().map(|&(n, _)| n).collect();
        let mut i = 0;
        while i < to_visit.len() && self.extended.len() < self.opts.extended_window {
            let node = to_visit[i];
            i += 1;
            for &succ in self.dag.successors(node) {
                self.remaining_preds[succ] -= 1;
                decremented.push((succ, 1));
                if self.remaining_preds[succ] == 0 {
                    let gate = &self.circuit.gates()[self.dag.gate_index(succ)];
                    if gate.kind.arity() == 2 {
                        self.extended.push((gate.qubits[0], gate.qubits[1]));
                    }
                    to_visit.push(succ);
                }
            }
        }
        for (node, amount) in decremented {
            self.remaining_preds[node] += amount;
        }
    }

    /// Score all candidate swaps (edges touching an active front qubit) and
    /// pick the cheapest, tie-broken uniformly by the seeded RNG.
    fn choose_best_swap(&mut self) -> (usize, usize) {
        let mut candidates: Vec<(usize, usize)> = Vec::new();
        for &(_, (a, b)) in &self.front {
            for q in [a, b] {
                let p = self.layout.phys_of(q);
                for u in self.graph.neighbors(p) {
                    let swap = (p.min(u), p.max(u));
                    if !candidates.contains(&swap) {
                        candidates.push(swap);
                    }
                }
            }
        }
        debug_assert!(!candidates.is_empty(), "front gates always have neighbors");

        let front_pairs: Vec<(usize, usize)> = self.front.iter().map(|&(_, p)| p).collect();
        let mut best_cost = f64::INFINITY;
        let mut best: Vec<(usize, usize)> = Vec::new();
        for swap in candidates {
            self.layout.swap_physical(swap.0, swap.1);
            let cost = heuristic_cost(
                &front_pairs,
                &self.extended,
                &self.layout,
                &self.dist,
                self.opts.extended_weight,
                &self.decay,
                swap,
            );
            self.layout.swap_physical(swap.0, swap.1);
            if cost < best_cost - 1e-9 {
                best_cost = cost;
                best.clear();
                best.push(swap);
            } else if (cost - best_cost).abs() <= 1e-9 {
                best.push(swap);
            }
        }
        best[self.rng.gen_range(0..best.len())]
    }

    fn bump_decay(&mut self, swap: (usize, usize)) {
        self.decay_round += 1;
        if self.decay_round >= self.opts.decay_reset {
            self.decay.fill(1.0);
            self.decay_round = 0;
        } else {
            self.decay[swap.0] += self.opts.decay_increment;
            self.decay[swap.1] += self.opts.decay_increment;
        }
    }

    /// Release valve: swap along a shortest path, both ends meeting in the
    /// middle, to force the closest front gate together.
    fn force_closest(&mut self, swaps: &mut Vec<(usize, usize)>) {
        let mut closest: Option<(u32, usize, usize)> = None;
        for &(_, (a, b)) in &self.front {
            let d = self
                .dist
                .get(self.layout.phys_of(a), self.layout.phys_of(b));
            if closest.is_none_or(|(best, _, _)| d < best) {
                closest = Some((d, a, b));
            }
        }
        let (_, a, b) = closest.expect("front is non-empty when forcing");
        let path = self.shortest_path(self.layout.phys_of(a), self.layout.phys_of(b));
        let mut ai = 0;
        let mut bi = path.len() - 1;
        for step in 0..path.len().saturating_sub(2) {
            let swap = if step % 2 == 0 {
                ai += 1;
                (path[ai - 1], path[ai])
            } else {
                bi -= 1;
                (path[bi + 1], path[bi])
            };
            self.layout.swap_physical(swap.0, swap.1);
            swaps.push(swap);
        }
    }

    /// Deterministic BFS shortest path between two physical qubits.
    fn shortest_path(&self, from: usize, to: usize) -> Vec<usize> {
        let n = self.graph.num_vertices();
        let mut prev: Vec<Option<usize>> = vec![None; n];
        let mut seen = vec![false; n];
        let mut queue = std::collections::VecDeque::new();
        seen[from] = true;
        queue.push_back(from);
        while let Some(v) = queue.pop_front() {
            if v == to {
                break;
            }
            for u in self.graph.neighbors(v) {
                if !seen[u] {
                    seen[u] = true;
                    prev[u] = Some(v);
                    queue.push_back(u);
                }
            }
        }
        let mut path = vec![to];
        let mut cur = to;
        while let Some(p) = prev[cur] {
            path.push(p);
            cur = p;
        }
        debug_assert_eq!(cur, from, "endpoints must be connected");
        path.reverse();
        path
    }
}

/// Route `c` onto `g`, producing a hardware-legal physical schedule.
/// Deterministic for fixed inputs and seed.
pub fn route(
    c: &Circuit,
    g: &TopologyGraph,
    opts: &RouterOptions,
    seed: u64,
) -> Result<RoutedCircuit, RouteError> {
    let initial = initial_layout(c, g)?;
    let dist = g.distance_matrix();
    for (a, b) in c.interactions() {
        if !dist.is_connected(a, b) {
            return Err(RouteError::Unroutable { a, b });
        }
    }

    let dag = c.dag();
    let remaining_preds: Vec<usize> = (0..dag.num_nodes())
        .map(|node| dag.predecessors(node).len())
        .collect();
    let sources = dag.sources();
    let attempt_limit = opts
        .attempt_limit
        .unwrap_or_else(|| (10 * g.num_vertices()).max(20));

    let mut state = RoutingState {
        circuit: c,
        graph: g,
        dist,
        opts,
        dag,
        layout: initial.clone(),
        remaining_preds,
        front: Vec::new(),
        extended: Vec::new(),
        ops: Vec::new(),
        decay: vec![1.0; g.num_vertices()],
        decay_round: 0,
        rng: ChaCha8Rng::seed_from_u64(seed),
    };

    state.advance(sources);
    state.rebuild_extended();

    while !state.front.is_empty() {
        let mut current_swaps: Vec<(usize, usize)> = Vec::new();
        let mut routable: Vec<usize> = Vec::new();
        while routable.is_empty() && current_swaps.len() <= attempt_limit {
            let swap = state.choose_best_swap();
            state.layout.swap_physical(swap.0, swap.1);
            current_swaps.push(swap);
            state.bump_decay(swap);
            routable = state.take_routable();
        }
        if routable.is_empty() {
            // No progress within the attempt budget: unwind and force the
            // closest gate along a shortest path.
            for &(a, b) in current_swaps.iter().rev() {
                state.layout.swap_physical(a, b);
            }
            current_swaps.clear();
            state.force_closest(&mut current_swaps);
            routable = state.take_routable();
            debug_assert!(!routable.is_empty(), "forced path must route a gate");
        }
        for &(a, b) in &current_swaps {
            state.ops.push(RoutedOp {
                kind: GateKind::Swap,
                qubits: vec![a, b],
                inserted: true,
            });
        }
        state.advance(routable);
        state.rebuild_extended();
    }

    // Measurements commute to the end under the depth convention; emit them
    // against the final placement. Barriers are scheduling-transparent and
    // are dropped from the physical schedule.
    for gate in c.gates() {
        if gate.kind == GateKind::Measure {
            state.ops.push(RoutedOp {
                kind: GateKind::Measure,
                qubits: vec![state.layout.phys_of(gate.qubits[0])],
                inserted: false,
            });
        }
    }

    let (depth, total_gates, swap_count) =
        accounting(&state.ops, g.num_vertices(), opts.swap_as_one);
    Ok(RoutedCircuit {
        ops: state.ops,
        num_physical: g.num_vertices(),
        num_logical: c.num_qubits(),
        depth,
        total_gates,
        swap_count,
        initial_map: initial,
        final_map: state.layout,
        swap_as_one: opts.swap_as_one,
    })
}

/// ASAP depth, gate total, and inserted-swap count of a physical schedule.
fn accounting(ops: &[RoutedOp], num_physical: usize, swap_as_one: bool) -> (usize, usize, usize) {
    let mut busy_until = vec![0usize; num_physical];
    let mut total_gates = 0usize;
    let mut swap_count = 0usize;
    for op in ops {
        match op.kind {
            GateKind::Barrier | GateKind::Measure => {}
            GateKind::Swap => {
                let width = if swap_as_one { 1 } else { 3 };
                let (a, b) = (op.qubits[0], op.qubits[1]);
                let done = busy_until[a].max(busy_until[b]) + width;
                busy_until[a] = done;
                busy_until[b] = done;
                total_gates += width;
                if op.inserted {
                    swap_count += 1;
                }
            }
            GateKind::Cx => {
                let (a, b) = (op.qubits[0], op.qubits[1]);
                let done = busy_until[a].max(busy_until[b]) + 1;
                busy_until[a] = done;
                busy_until[b] = done;
                total_gates += 1;
            }
            _ => {
                busy_until[op.qubits[0]] += 1;
                total_gates += 1;
            }
        }
    }
    let depth = busy_until.into_iter().max().unwrap_or(0);
    (depth, total_gates, swap_count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::GateOp;
    use crate::topology::{make_complete, make_line, TopologyGraph};

    fn cx_circuit(n: usize, pairs: &[(usize, usize)]) -> Circuit {
        let gates = pairs
            .iter()
            .map(|&(a, b)| GateOp::two(GateKind::Cx, a, b))
            .collect();
        Circuit::new(n, gates, "t").unwrap()
    }

    #[test]
    fn initial_layout_is_sequential() {
        let c = cx_circuit(3, &[(0, 1)]);
        let g = make_line(5);
        let m = initial_layout(&c, &g).unwrap();
        assert_eq!(m.assignment(), vec![0, 1, 2]);

        let one = Circuit::new(1, vec![GateOp::one(GateKind::H, 0)], "h").unwrap();
        assert_eq!(
            initial_layout(&one, &make_line(1)).unwrap().assignment(),
            vec![0]
        );

        let big = cx_circuit(6, &[(0, 5)]);
        assert_eq!(
            initial_layout(&big, &make_line(5)).unwrap_err(),
            RouteError::TooFewPhysicalQubits {
                needed: 6,
                available: 5
            }
        );
    }

    #[test]
    fn adjacent_gate_needs_no_swaps() {
        let c = cx_circuit(2, &[(0, 1)]);
        let rc = route(&c, &make_line(2), &RouterOptions::default(), 0).unwrap();
        assert_eq!(rc.swap_count, 0);
        assert_eq!(rc.depth, 1);
        assert_eq!(rc.total_gates, 1);
    }

    #[test]
    fn distance_two_gate_needs_one_swap() {
        let c = cx_circuit(3, &[(0, 2)]);
        let rc = route(&c, &make_line(3), &RouterOptions::default(), 0).unwrap();
        assert_eq!(rc.swap_count, 1);
        // swap (3 cx) then the gate, serialized on a shared qubit
        assert_eq!(rc.depth, 4);
        assert_eq!(rc.total_gates, 4);

        let one = route(
            &c,
            &make_line(3),
            &RouterOptions {
                swap_as_one: true,
                ..Default::default()
            },
            0,
        )
        .unwrap();
        assert_eq!(one.depth, 2);
        assert_eq!(one.total_gates, 2);
    }

    #[test]
    fn complete_graph_matches_logical_depth() {
        let c = crate::circuit::generate_random_circuit(5, 6.0, 11);
        let g = make_complete(5);
        let rc = route(&c, &g, &RouterOptions::default(), 3).unwrap();
        assert_eq!(rc.swap_count, 0);
        assert_eq!(rc.depth, c.logical_depth());
    }

    #[test]
    fn unroutable_components_are_an_error() {
        let c = cx_circuit(2, &[(0, 1)]);
        let g = TopologyGraph::empty(2).unwrap();
        assert_eq!(
            route(&c, &g, &RouterOptions::default(), 0).unwrap_err(),
            RouteError::Unroutable { a: 0, b: 1 }
        );
    }

    #[test]
    fn deterministic_per_seed() {
        let c = crate::circuit::generate_random_circuit(6, 8.0, 21);
        let g = make_line(6);
        let r1 = route(&c, &g, &RouterOptions::default(), 42).unwrap();
        let r2 = route(&c, &g, &RouterOptions::default(), 42).unwrap();
        assert_eq!(r1, r2);
    }

    #[test]
    fn heuristic_cost_examples() {
        let g = make_line(3);
        let dist = g.distance_matrix();
        let map = QubitMap::sequential(3, 3).unwrap();
        let decay = vec![1.0; 3];
        // adjacent front gate: base cost 1, no extended term
        let cost = heuristic_cost(&[(0, 1)], &[], &map, &dist, 0.5, &decay, (0, 1));
        assert_eq!(cost, 1.0);
        // extended set contributes w/|ext| * sum
        let cost = heuristic_cost(&[(0, 1)], &[(0, 2)], &map, &dist, 0.5, &decay, (0, 1));
        assert_eq!(cost, 1.0 + 0.5 * 2.0);
    }
}

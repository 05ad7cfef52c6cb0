//! Dependency DAG over the counted gates of a circuit.
//!
//! Gate `u` precedes gate `v` iff they share a qubit and `u` appears earlier
//! in the program. Nodes are indices into the counted-gate list; barriers and
//! measures are transparent and never appear.

use super::Circuit;

#[derive(Debug, Clone)]
pub struct CircuitDag {
    /// Original gate-list index of each node.
    gate_indices: Vec<usize>,
    /// Direct predecessors per node (nearest earlier gate on each shared qubit).
    preds: Vec<Vec<usize>>,
    /// Direct successors per node.
    succs: Vec<Vec<usize>>,
    /// ASAP layer per node: sources are 0, otherwise 1 + max over predecessors.
    layers: Vec<usize>,
}

impl CircuitDag {
    pub fn build(circuit: &Circuit) -> Self {
        let counted: Vec<usize> = circuit.counted_gates().map(|(i, _)| i).collect();
        let n = counted.len();
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut succs: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut layers = vec![0usize; n];
        let mut last_on_qubit: Vec<Option<usize>> = vec![None; circuit.num_qubits()];

        for (node, &gi) in counted.iter().enumerate() {
            let gate = &circuit.gates()[gi];
            for &q in &gate.qubits {
                if let Some(prev) = last_on_qubit[q] {
                    if !preds[node].contains(&prev) {
                        preds[node].push(prev);
                        succs[prev].push(node);
                    }
                    layers[node] = layers[node].max(layers[prev] + 1);
                }
                last_on_qubit[q] = Some(node);
            }
        }

        Self {
            gate_indices: counted,
            preds,
            succs,
            layers,
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.gate_indices.len()
    }

    /// Original gate-list index backing DAG node `node`.
    pub fn gate_index(&self, node: usize) -> usize {
        self.gate_indices[node]
    }

    pub fn predecessors(&self, node: usize) -> &[usize] {
        &self.preds[node]
    }

    pub fn successors(&self, node: usize) -> &[usize] {
        &self.succs[node]
    }

    pub fn layer(&self, node: usize) -> usize {
        self.layers[node]
    }

    /// Circuit depth: max layer + 1, or 0 for an empty DAG.
    pub fn depth(&self) -> usize {
        self.layers.iter().max().map_or(0, |&m| m + 1)
    }

    /// Nodes with no predecessors.
    pub fn sources(&self) -> Vec<usize> {
        (0..self.num_nodes())
            .filter(|&v| self.preds[v].is_empty())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{GateKind, GateOp};

    fn chain() -> Circuit {
        Circuit::new(
            3,
            vec![
                GateOp::one(GateKind::H, 0),
                GateOp::two(GateKind::Cx, 0, 1),
                GateOp::two(GateKind::Cx, 1, 2),
                GateOp::one(GateKind::T, 2),
            ],
            "chain",
        )
        .unwrap()
    }

    #[test]
    fn layers_follow_shared_qubit_dependencies() {
        let dag = chain().dag();
        assert_eq!(dag.num_nodes(), 4);
        assert_eq!(dag.layer(0), 0);
        assert_eq!(dag.layer(1), 1);
        assert_eq!(dag.layer(2), 2);
        assert_eq!(dag.layer(3), 3);
        assert_eq!(dag.depth(), 4);
        assert_eq!(dag.sources(), vec![0]);
    }

    #[test]
    fn dag_is_acyclic_by_construction() {
        // Edges only point from earlier nodes to later nodes.
        let dag = chain().dag();
        for v in 0..dag.num_nodes() {
            for &p in dag.predecessors(v) {
                assert!(p < v);
            }
            for &s in dag.successors(v) {
                assert!(s > v);
            }
        }
    }
}

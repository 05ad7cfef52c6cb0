//! Logical circuit IR: a gate list over `num_qubits` qubits, plus the
//! dependency DAG and the metrics derived from it.
//!
//! Depth convention: every gate counts as one layer except `BARRIER` and
//! `MEASURE`, which are scheduling-transparent. This matches the usual
//! transpiler convention for reported depths.

mod dag;
mod metrics;
mod parse;
mod random;

pub use dag::CircuitDag;
pub use metrics::{distribution_fidelity, idle_ratio, MetricsError};
pub use parse::{parse_qasm, ParseError};
pub use random::generate_random_circuit;

use std::fmt::Write as _;

use thiserror::Error;

/// Gate alphabet. Two-qubit kinds are `Cx` and `Swap`; everything else is
/// single-qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateKind {
    H,
    X,
    S,
    T,
    /// Z-rotation by a literal angle in radians.
    Rz(f64),
    Cx,
    Swap,
    Measure,
    Barrier,
}

impl GateKind {
    pub fn arity(&self) -> usize {
        match self {
            GateKind::Cx | GateKind::Swap => 2,
            _ => 1,
        }
    }

    /// Whether the gate contributes a layer to circuit depth.
    pub fn counts_for_depth(&self) -> bool {
        !matches!(self, GateKind::Measure | GateKind::Barrier)
    }

    fn qasm_name(&self) -> &'static str {
        match self {
            GateKind::H => "h",
            GateKind::X => "x",
            GateKind::S => "s",
            GateKind::T => "t",
            GateKind::Rz(_) => "rz",
            GateKind::Cx => "cx",
            GateKind::Swap => "swap",
            GateKind::Measure => "measure",
            GateKind::Barrier => "barrier",
        }
    }
}

/// One gate application. `qubits` holds one index, or two distinct indices
/// for the two-qubit kinds (control first for `Cx`).
#[derive(Debug, Clone, PartialEq)]
pub struct GateOp {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
}

impl GateOp {
    pub fn one(kind: GateKind, q: usize) -> Self {
        debug_assert_eq!(kind.arity(), 1);
        Self {
            kind,
            qubits: vec![q],
        }
    }

    pub fn two(kind: GateKind, a: usize, b: usize) -> Self {
        debug_assert_eq!(kind.arity(), 2);
        Self {
            kind,
            qubits: vec![a, b],
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum CircuitError {
    #[error("gate {index}: qubit {qubit} out of range for {num_qubits} qubits")]
    QubitOutOfRange {
        index: usize,
        qubit: usize,
        num_qubits: usize,
    },
    #[error("gate {index}: two-qubit gate references identical qubits ({qubit})")]
    IdenticalQubits { index: usize, qubit: usize },
    #[error("gate {index}: {kind:?} takes {expected} qubit(s), got {got}")]
    BadArity {
        index: usize,
        kind: GateKind,
        expected: usize,
        got: usize,
    },
    #[error("circuit must have at least one qubit")]
    NoQubits,
}

/// A logical quantum program: an ordered gate list over `num_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    num_qubits: usize,
    gates: Vec<GateOp>,
    name: String,
}

impl Circuit {
    pub fn new(
        num_qubits: usize,
        gates: Vec<GateOp>,
        name: impl Into<String>,
    ) -> Result<Self, CircuitError> {
        if num_qubits == 0 {
            return Err(CircuitError::NoQubits);
        }
        for (index, g) in gates.iter().enumerate() {
            let expected = g.kind.arity();
            if g.qubits.len() != expected {
                return Err(CircuitError::BadArity {
                    index,
                    kind: g.kind,
                    expected,
                    got: g.qubits.len(),
                });
            }
            for &q in &g.qubits {
                if q >= num_qubits {
                    return Err(CircuitError::QubitOutOfRange {
                        index,
                        qubit: q,
                        num_qubits,
                    });
                }
            }
            if expected == 2 && g.qubits[0] == g.qubits[1] {
                return Err(CircuitError::IdenticalQubits {
                    index,
                    qubit: g.qubits[0],
                });
            }
        }
        Ok(Self {
            num_qubits,
            gates,
            name: name.into(),
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[GateOp] {
        &self.gates
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Gates that count toward depth (everything except barrier/measure).
    pub fn counted_gates(&self) -> impl Iterator<Item = (usize, &GateOp)> {
        self.gates
            .iter()
            .enumerate()
            .filter(|(_, g)| g.kind.counts_for_depth())
    }

    pub fn num_counted_gates(&self) -> usize {
        self.counted_gates().count()
    }

    /// Indices of the two-qubit interactions, in program order.
    pub fn interactions(&self) -> Vec<(usize, usize)> {
        self.gates
            .iter()
            .filter(|g| g.kind.arity() == 2 && g.kind.counts_for_depth())
            .map(|g| (g.qubits[0], g.qubits[1]))
            .collect()
    }

    pub fn dag(&self) -> CircuitDag {
        CircuitDag::build(self)
    }

    /// Length of the longest dependency chain of counted gates.
    pub fn logical_depth(&self) -> usize {
        self.dag().depth()
    }

    /// Canonical OpenQASM 2.0 text for this circuit.
    pub fn to_qasm(&self) -> String {
        let mut out = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
        let _ = writeln!(out, "qreg q[{}];", self.num_qubits);
        if self.gates.iter().any(|g| g.kind == GateKind::Measure) {
            let _ = writeln!(out, "creg c[{}];", self.num_qubits);
        }
        for g in &self.gates {
            match g.kind {
                GateKind::Rz(angle) => {
                    let _ = writeln!(out, "rz({:?}) q[{}];", angle, g.qubits[0]);
                }
                GateKind::Cx | GateKind::Swap => {
                    let _ = writeln!(
                        out,
                        "{} q[{}],q[{}];",
                        g.kind.qasm_name(),
                        g.qubits[0],
                        g.qubits[1]
                    );
                }
                GateKind::Measure => {
                    let _ = writeln!(out, "measure q[{0}] -> c[{0}];", g.qubits[0]);
                }
                _ => {
                    let _ = writeln!(out, "{} q[{}];", g.kind.qasm_name(), g.qubits[0]);
                }
            }
        }
        out
    }
}

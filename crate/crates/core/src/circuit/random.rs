//! Seeded random circuit generator used by the scaling benchmarks.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Circuit, GateKind, GateOp};

/// Generate a random circuit with `round(num_qubits * gate_factor)` gates.
///
/// Half the gates (in expectation) are cx on a uniform ordered pair of
/// distinct qubits; the rest are uniform single-qubit gates from {h, x, t}.
/// Deterministic for a fixed seed.
pub fn generate_random_circuit(num_qubits: usize, gate_factor: f64, seed: u64) -> Circuit {
    assert!(num_qubits >= 2, "need at least two qubits");
    assert!(gate_factor > 0.0, "gate factor must be positive");
    let num_gates = (num_qubits as f64 * gate_factor).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gates = Vec::with_capacity(num_gates);
    for _ in 0..num_gates {
        if rng.gen_bool(0.5) {
            let a = rng.gen_range(0..num_qubits);
            let mut b = rng.gen_range(0..num_qubits - 1);
            if b >= a {
                b += 1;
            }
            gates.push(GateOp::two(GateKind::Cx, a, b));
        } else {
            let kind = match rng.gen_range(0..3) {
                0 => GateKind::H,
                1 => GateKind::X,
                _ => GateKind::T,
            };
            gates.push(GateOp::one(kind, rng.gen_range(0..num_qubits)));
        }
    }
    Circuit::new(
        num_qubits,
        gates,
        format!("rand_q{num_qubits}_f{gate_factor}_s{seed}"),
    )
    .expect("generated gates are valid by construction")
}

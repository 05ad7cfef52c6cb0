//! The five `qtopo` subcommands.

pub mod bench;
pub mod layout;
pub mod metrics;
pub mod route;
pub mod train;

pub use bench::{cmd_bench, BenchArgs, BenchRow, BenchSummary};
pub use layout::{cmd_layout, LayoutArgs, LayoutSummary};
pub use metrics::{cmd_metrics_fidelity, cmd_metrics_idle, read_probability_csv};
pub use route::{cmd_route, RouteArgs, RouteSummary};
pub use train::{cmd_train, TrainArgs, TrainSummary};

use qtopo_core::circuit::Circuit;
use qtopo_core::router::{route, RouteError, RouterOptions};
use qtopo_core::topology::TopologyGraph;

/// Router options and seed set used for a measurement. Baseline and tailored
/// evaluations share one value of this struct, so they cannot drift apart.
#[derive(Debug, Clone)]
pub struct EvalSpec {
    pub opts: RouterOptions,
    pub seeds: Vec<u64>,
}

impl EvalSpec {
    pub fn new(opts: RouterOptions, base_seed: u64, count: usize) -> Self {
        assert!(count >= 1, "at least one routing seed");
        Self {
            opts,
            seeds: (0..count as u64)
                .map(|i| base_seed.wrapping_add(i))
                .collect(),
        }
    }

    /// Mean routed metrics over the seed set.
    pub fn evaluate(&self, c: &Circuit, g: &TopologyGraph) -> Result<EvalResult, RouteError> {
        let mut depth = 0.0;
        let mut gates = 0.0;
        let mut swaps = 0.0;
        for &seed in &self.seeds {
            let rc = route(c, g, &self.opts, seed)?;
            depth += rc.depth as f64;
            gates += rc.total_gates as f64;
            swaps += rc.swap_count as f64;
        }
        let n = self.seeds.len() as f64;
        Ok(EvalResult {
            mean_depth: depth / n,
            mean_gates: gates / n,
            mean_swaps: swaps / n,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalResult {
    pub mean_depth: f64,
    pub mean_gates: f64,
    pub mean_swaps: f64,
}

impl EvalResult {
    /// Idle fraction of the schedule: `1 - gates / (qubits * depth)`.
    pub fn idle(&self, qubits: usize) -> f64 {
        1.0 - self.mean_gates / (qubits as f64 * self.mean_depth)
    }
}

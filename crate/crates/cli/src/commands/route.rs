//! `qtopo route`: route a circuit onto a fixed topology and report metrics.

use std::path::PathBuf;

use serde::Serialize;

use qtopo_core::router::{route, RouterOptions};

use super::EvalSpec;
use crate::{load_circuit, load_topology, topology_hash, write_snapshot, CliError};

#[derive(Debug, Clone)]
pub struct RouteArgs {
    /// QASM path or `gen:QxF[@SEED]`.
    pub circuit: String,
    /// `grid:RxC`, `line:N`, or `file:PATH`.
    pub topology: String,
    /// Number of routing seeds to average.
    pub seeds: usize,
    pub seed: u64,
    pub swap_as_one: bool,
    pub max_degree: usize,
    pub out_dir: PathBuf,
    /// Also write the routed circuit of the first seed as QASM.
    pub emit_qasm: bool,
}

impl Default for RouteArgs {
    fn default() -> Self {
        Self {
            circuit: String::new(),
            topology: String::new(),
            seeds: 3,
            seed: 0,
            swap_as_one: false,
            max_degree: qtopo_core::topology::DEFAULT_MAX_DEGREE,
            out_dir: PathBuf::from("qtopo-runs/route"),
            emit_qasm: false,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RouteRun {
    pub depth: usize,
    pub total_gates: usize,
    pub swap_count: usize,
    pub seed: u64,
    pub topology_hash: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RouteSummary {
    pub circuit: String,
    pub qubits: usize,
    pub logical_depth: usize,
    pub topology: String,
    pub topology_hash: String,
    pub runs: Vec<RouteRun>,
    pub mean_depth: f64,
    pub mean_total_gates: f64,
    pub mean_swap_count: f64,
    pub mean_idle: f64,
}

pub fn cmd_route(args: &RouteArgs) -> Result<RouteSummary, CliError> {
    if args.seeds == 0 {
        return Err(CliError::Parse("need at least one routing seed".into()));
    }
    let circuit = load_circuit(&args.circuit, args.seed)?;
    let (graph, label) = load_topology(&args.topology, args.max_degree)?;
    let opts = RouterOptions {
        swap_as_one: args.swap_as_one,
        ..RouterOptions::default()
    };
    let spec = EvalSpec::new(opts.clone(), args.seed, args.seeds);

    let hash = topology_hash(&graph);
    let mut runs = Vec::with_capacity(spec.seeds.len());
    for &seed in &spec.seeds {
        let rc = route(&circuit, &graph, &opts, seed)
            .map_err(|e| CliError::Route(format!("{}: {e}", circuit.name())))?;
        runs.push(RouteRun {
            depth: rc.depth,
            total_gates: rc.total_gates,
            swap_count: rc.swap_count,
            seed,
            topology_hash: hash.clone(),
        });
    }
    let eval = spec
        .evaluate(&circuit, &graph)
        .map_err(|e| CliError::Route(e.to_string()))?;
    let summary = RouteSummary {
        circuit: circuit.name().to_string(),
        qubits: circuit.num_qubits(),
        logical_depth: circuit.logical_depth(),
        topology: label,
        topology_hash: hash,
        runs,
        mean_depth: eval.mean_depth,
        mean_total_gates: eval.mean_gates,
        mean_swap_count: eval.mean_swaps,
        mean_idle: eval.idle(circuit.num_qubits()),
    };

    let settings = format!(
        "command = route\ncircuit = {}\ntopology = {}\nseeds = {}\nseed = {}\nswap_as_one = {}\nmax_degree = {}\n",
        args.circuit, args.topology, args.seeds, args.seed, args.swap_as_one, args.max_degree
    );
    write_snapshot(&args.out_dir, &settings)?;
    let json = serde_json::to_string_pretty(&summary).map_err(|e| CliError::Io(e.to_string()))?;
    std::fs::write(args.out_dir.join("route_report.json"), json)?;
    if args.emit_qasm {
        let rc = route(&circuit, &graph, &opts, spec.seeds[0])
            .map_err(|e| CliError::Route(e.to_string()))?;
        std::fs::write(args.out_dir.join("routed.qasm"), rc.to_qasm())?;
    }
    Ok(summary)
}

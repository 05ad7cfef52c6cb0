//! `qtopo bench`: route a suite of circuits on the square-grid baseline and
//! on trained tailored topologies, then emit a comparison table.

use std::fmt::Write as _;
use std::path::PathBuf;

use serde::Serialize;

use qtopo_core::circuit::{generate_random_circuit, parse_qasm, Circuit};
use qtopo_core::env::EnvConfig;
use qtopo_core::ppo::TrainConfig;
use qtopo_core::router::RouterOptions;

use super::train::train_in_memory;
use super::EvalSpec;
use crate::{baseline_grid, load_topology, write_snapshot, CliError};

#[derive(Debug, Clone)]
pub struct BenchArgs {
    /// Directory of `.qasm` files, or a suite spec
    /// `gen:qubits=A..B,factor=F,count=N`.
    pub source: String,
    pub seed: u64,
    /// Routing seeds averaged per measurement (baseline and tailored alike).
    pub eval_seeds: usize,
    pub iterations: usize,
    pub replay_threshold: usize,
    /// Baseline override such as `grid:10x10`; default is the smallest square
    /// grid that fits each circuit.
    pub grid: Option<String>,
    pub max_degree: usize,
    pub out_dir: PathBuf,
}

impl Default for BenchArgs {
    fn default() -> Self {
        Self {
            source: String::new(),
            seed: 0,
            eval_seeds: 3,
            iterations: 60,
            replay_threshold: 2,
            grid: None,
            max_degree: qtopo_core::topology::DEFAULT_MAX_DEGREE,
            out_dir: PathBuf::from("qtopo-runs/bench"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub circuit: String,
    pub qubits: usize,
    pub gates_in: usize,
    pub baseline_topology: String,
    pub baseline_depth: f64,
    pub baseline_gates: f64,
    pub baseline_idle_pct: f64,
    pub tailored_depth: f64,
    pub tailored_gates: f64,
    pub tailored_idle_pct: f64,
    pub reduction_pct: f64,
    pub status: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchSummary {
    pub rows: Vec<BenchRow>,
    pub ok_rows: usize,
    pub improved_or_equal: usize,
    pub median_reduction_pct: f64,
}

fn parse_suite(args: &BenchArgs) -> Result<Vec<Circuit>, CliError> {
    if let Some(spec) = args.source.strip_prefix("gen:") {
        let mut qubits = (6usize, 10usize);
        let mut factor = 10.0f64;
        let mut count = 10usize;
        for part in spec.split(',') {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| CliError::Parse(format!("bad suite field `{part}`")))?;
            match key.trim() {
                "qubits" => {
                    let (a, b) = value.split_once("..").ok_or_else(|| {
                        CliError::Parse(format!("qubits wants A..B, got `{value}`"))
                    })?;
                    qubits = (
                        a.parse()
                            .map_err(|_| CliError::Parse(format!("bad qubit bound `{a}`")))?,
                        b.parse()
                            .map_err(|_| CliError::Parse(format!("bad qubit bound `{b}`")))?,
                    );
                }
                "factor" => {
                    factor = value
                        .parse()
                        .map_err(|_| CliError::Parse(format!("bad factor `{value}`")))?;
                }
                "count" => {
                    count = value
                        .parse()
                        .map_err(|_| CliError::Parse(format!("bad count `{value}`")))?;
                }
                other => return Err(CliError::Parse(format!("unknown suite field `{other}`"))),
            }
        }
        if qubits.0 < 3 || qubits.1 < qubits.0 || count == 0 || factor <= 0.0 {
            return Err(CliError::Parse(format!(
                "unusable suite spec `{}` (need 3 <= A <= B, count > 0, factor > 0)",
                args.source
            )));
        }
        let span = qubits.1 - qubits.0 + 1;
        return Ok((0..count)
            .map(|i| {
                let n = qubits.0 + i % span;
                generate_random_circuit(n, factor, args.seed.wrapping_add(i as u64))
            })
            .collect());
    }

    let mut paths: Vec<PathBuf> = std::fs::read_dir(&args.source)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", args.source)))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "qasm"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::Io(format!(
            "no .qasm files found in {}",
            args.source
        )));
    }
    paths
        .into_iter()
        .map(|p| {
            let text = std::fs::read_to_string(&p)
                .map_err(|e| CliError::Io(format!("cannot read {}: {e}", p.display())))?;
            let parsed =
                parse_qasm(&text).map_err(|e| CliError::Parse(format!("{}: {e}", p.display())))?;
            let name = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "circuit".into());
            Circuit::new(parsed.num_qubits(), parsed.gates().to_vec(), name)
                .map_err(|e| CliError::Parse(e.to_string()))
        })
        .collect()
}

fn bench_one(circuit: &Circuit, args: &BenchArgs, row_seed: u64) -> Result<BenchRow, CliError> {
    let qubits = circuit.num_qubits();
    let spec = EvalSpec::new(RouterOptions::default(), args.seed, args.eval_seeds);

    let (baseline_graph, baseline_label) = match &args.grid {
        Some(g) => load_topology(g, usize::MAX)?,
        None => baseline_grid(qubits),
    };
    if baseline_graph.num_vertices() < qubits {
        return Err(CliError::Route(format!(
            "baseline {} too small for {} qubits",
            baseline_label, qubits
        )));
    }
    let baseline = spec
        .evaluate(circuit, &baseline_graph)
        .map_err(|e| CliError::Route(e.to_string()))?;

    let mut env_cfg = EnvConfig::new(circuit.clone());
    env_cfg.max_degree = args.max_degree;
    env_cfg.replay_threshold = args.replay_threshold;
    env_cfg.eval_seeds = spec.seeds.clone();
    let train_cfg = TrainConfig {
        iterations: args.iterations,
        seed: row_seed,
        ..TrainConfig::default()
    };
    let (_d0, _best, best_graph, _metrics) = train_in_memory(env_cfg, &train_cfg)?;
    let tailored = spec
        .evaluate(circuit, &best_graph)
        .map_err(|e| CliError::Route(e.to_string()))?;

    Ok(BenchRow {
        circuit: circuit.name().to_string(),
        qubits,
        gates_in: circuit.num_counted_gates(),
        baseline_topology: baseline_label,
        baseline_depth: baseline.mean_depth,
        baseline_gates: baseline.mean_gates,
        baseline_idle_pct: 100.0 * baseline.idle(qubits),
        tailored_depth: tailored.mean_depth,
        tailored_gates: tailored.mean_gates,
        tailored_idle_pct: 100.0 * tailored.idle(qubits),
        reduction_pct: 100.0 * (baseline.mean_depth - tailored.mean_depth) / baseline.mean_depth,
        status: "ok".into(),
    })
}

pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from(
        "circuit,qubits,gates_in,baseline_topology,baseline_depth,baseline_gates,\
         baseline_idle_pct,tailored_depth,tailored_gates,tailored_idle_pct,reduction_pct,status\n",
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{}",
            r.circuit,
            r.qubits,
            r.gates_in,
            r.baseline_topology,
            r.baseline_depth,
            r.baseline_gates,
            r.baseline_idle_pct,
            r.tailored_depth,
            r.tailored_gates,
            r.tailored_idle_pct,
            r.reduction_pct,
            r.status
        );
    }
    out
}

pub fn cmd_bench(args: &BenchArgs) -> Result<BenchSummary, CliError> {
    let circuits = parse_suite(args)?;
    let mut rows = Vec::with_capacity(circuits.len());
    for (i, circuit) in circuits.iter().enumerate() {
        let row_seed = args.seed.wrapping_add(1000).wrapping_add(i as u64);
        match bench_one(circuit, args, row_seed) {
            Ok(row) => rows.push(row),
            // A failed circuit is recorded and the suite continues.
            Err(e) => rows.push(BenchRow {
                circuit: circuit.name().to_string(),
                qubits: circuit.num_qubits(),
                gates_in: circuit.num_counted_gates(),
                baseline_topology: String::new(),
                baseline_depth: f64::NAN,
                baseline_gates: f64::NAN,
                baseline_idle_pct: f64::NAN,
                tailored_depth: f64::NAN,
                tailored_gates: f64::NAN,
                tailored_idle_pct: f64::NAN,
                reduction_pct: f64::NAN,
                status: format!("error: {e}"),
            }),
        }
    }

    let ok: Vec<&BenchRow> = rows.iter().filter(|r| r.status == "ok").collect();
    let improved_or_equal = ok
        .iter()
        .filter(|r| r.tailored_depth <= r.baseline_depth)
        .count();
    let mut reductions: Vec<f64> = ok.iter().map(|r| r.reduction_pct).collect();
    reductions.sort_by(|a, b| a.partial_cmp(b).expect("no NaN in ok rows"));
    let median_reduction_pct = if reductions.is_empty() {
        f64::NAN
    } else {
        let m = reductions.len() / 2;
        if reductions.len() % 2 == 1 {
            reductions[m]
        } else {
            0.5 * (reductions[m - 1] + reductions[m])
        }
    };

    let summary = BenchSummary {
        ok_rows: ok.len(),
        improved_or_equal,
        median_reduction_pct,
        rows,
    };

    let settings = format!(
        "command = bench\nsource = {}\nseed = {}\neval_seeds = {}\niterations = {}\n\
         replay_threshold = {}\ngrid = {}\nmax_degree = {}\n",
        args.source,
        args.seed,
        args.eval_seeds,
        args.iterations,
        args.replay_threshold,
        args.grid.clone().unwrap_or_else(|| "auto".into()),
        args.max_degree
    );
    write_snapshot(&args.out_dir, &settings)?;
    std::fs::write(args.out_dir.join("bench.csv"), bench_csv(&summary.rows))?;
    let json = serde_json::to_string_pretty(&summary).map_err(|e| CliError::Io(e.to_string()))?;
    std::fs::write(args.out_dir.join("bench.json"), json)?;
    Ok(summary)
}

//! `qtopo train`: learn a tailored topology for one circuit with
//! reward-replay PPO and write every artifact needed to reproduce the run.

use std::path::{Path, PathBuf};

use qtopo_core::env::{trace_to_jsonl, EnvConfig, Environment, Objective, RewardSign, TopologyEnv};
use qtopo_core::ppo::{
    metrics_to_csv, save_checkpoint, train, Checkpoint, IterationMetrics, TrainConfig,
};
use qtopo_core::router::RouterOptions;
use qtopo_core::topology::TopologyGraph;

use crate::config::{resolve, FileConfig};
use crate::{config_hash, load_circuit, write_snapshot, CliError};

#[derive(Debug, Clone, Default)]
pub struct TrainArgs {
    /// QASM path or `gen:QxF[@SEED]`.
    pub circuit: String,
    pub out_dir: PathBuf,
    pub config_file: Option<PathBuf>,
    pub seed: Option<u64>,
    pub iterations: Option<usize>,
    pub batch_size: Option<usize>,
    pub minibatch_size: Option<usize>,
    pub learning_rate: Option<f64>,
    pub epochs: Option<usize>,
    pub replay_threshold: Option<usize>,
    /// `depth` or `gates`.
    pub objective: Option<String>,
    /// `negated` or `verbatim`.
    pub reward_sign: Option<String>,
    pub horizon: Option<usize>,
    pub eval_seeds: Option<usize>,
    pub max_degree: Option<usize>,
    pub max_qubits: Option<usize>,
    pub swap_as_one: Option<bool>,
    /// Use the full-scale 256x256 / 4000 / 128 / 5e-5 profile as the base.
    pub full_scale: bool,
}

#[derive(Debug)]
pub struct TrainSummary {
    pub circuit: String,
    pub qubits: usize,
    pub d0: f64,
    pub best_objective: f64,
    pub best_topology: TopologyGraph,
    pub metrics: Vec<IterationMetrics>,
    pub total_router_evals: usize,
    pub replay_hits: usize,
    pub replay_misses: usize,
}

/// Resolved knobs for one training run (flags over config file over defaults).
struct Resolved {
    seed: u64,
    train: TrainConfig,
    replay_threshold: usize,
    objective: Objective,
    reward_sign: RewardSign,
    horizon: Option<usize>,
    eval_seeds: usize,
    max_degree: usize,
    max_qubits: usize,
    swap_as_one: bool,
}

fn resolve_args(args: &TrainArgs) -> Result<Resolved, CliError> {
    let file = match &args.config_file {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let base = if args.full_scale {
        TrainConfig::full_scale()
    } else {
        TrainConfig::default()
    };
    let seed = resolve(args.seed, &file, "seed", 0)?;
    let train = TrainConfig {
        iterations: resolve(args.iterations, &file, "iterations", base.iterations)?,
        batch_size: resolve(args.batch_size, &file, "batch_size", base.batch_size)?,
        minibatch_size: resolve(
            args.minibatch_size,
            &file,
            "minibatch_size",
            base.minibatch_size,
        )?,
        learning_rate: resolve(
            args.learning_rate,
            &file,
            "learning_rate",
            base.learning_rate,
        )?,
        epochs: resolve(args.epochs, &file, "epochs", base.epochs)?,
        seed,
        ..base
    };
    let objective =
        match resolve(args.objective.clone(), &file, "objective", "depth".into())?.as_str() {
            "depth" => Objective::Depth,
            "gates" => Objective::Gates,
            other => return Err(CliError::Parse(format!("unknown objective `{other}`"))),
        };
    let reward_sign = match resolve(
        args.reward_sign.clone(),
        &file,
        "reward_sign",
        "negated".into(),
    )?
    .as_str()
    {
        "negated" => RewardSign::Negated,
        "verbatim" => RewardSign::Verbatim,
        other => return Err(CliError::Parse(format!("unknown reward sign `{other}`"))),
    };
    Ok(Resolved {
        seed,
        train,
        replay_threshold: resolve(args.replay_threshold, &file, "replay_threshold", 2)?,
        objective,
        reward_sign,
        horizon: match args.horizon {
            Some(h) => Some(h),
            None => file.get::<usize>("horizon")?,
        },
        eval_seeds: resolve(args.eval_seeds, &file, "eval_seeds", 3)?,
        max_degree: resolve(
            args.max_degree,
            &file,
            "max_degree",
            qtopo_core::topology::DEFAULT_MAX_DEGREE,
        )?,
        max_qubits: resolve(args.max_qubits, &file, "max_qubits", 20)?,
        swap_as_one: resolve(args.swap_as_one, &file, "swap_as_one", false)?,
    })
}

fn settings_text(args: &TrainArgs, r: &Resolved) -> String {
    format!(
        "command = train\ncircuit = {}\nseed = {}\niterations = {}\nbatch_size = {}\n\
         minibatch_size = {}\nlearning_rate = {:?}\nepochs = {}\nhidden = {:?}\n\
         replay_threshold = {}\nobjective = {:?}\nreward_sign = {:?}\nhorizon = {}\n\
         eval_seeds = {}\nmax_degree = {}\nswap_as_one = {}\n",
        args.circuit,
        r.seed,
        r.train.iterations,
        r.train.batch_size,
        r.train.minibatch_size,
        r.train.learning_rate,
        r.train.epochs,
        r.train.hidden,
        r.replay_threshold,
        r.objective,
        r.reward_sign,
        r.horizon
            .map(|h| h.to_string())
            .unwrap_or_else(|| "auto".into()),
        r.eval_seeds,
        r.max_degree,
        r.swap_as_one,
    )
}

pub fn cmd_train(args: &TrainArgs) -> Result<TrainSummary, CliError> {
    let r = resolve_args(args)?;
    let circuit = load_circuit(&args.circuit, r.seed)?;
    if circuit.num_qubits() < 3 {
        return Err(CliError::Train(format!(
            "training needs at least 3 qubits, circuit has {}",
            circuit.num_qubits()
        )));
    }
    if circuit.num_qubits() > r.max_qubits {
        return Err(CliError::Train(format!(
            "circuit has {} qubits, above the configured maximum {} (desk runs are sized for small circuits)",
            circuit.num_qubits(),
            r.max_qubits
        )));
    }

    let mut env_cfg = EnvConfig::new(circuit.clone());
    env_cfg.max_degree = r.max_degree;
    env_cfg.objective = r.objective;
    env_cfg.reward_sign = r.reward_sign;
    env_cfg.replay_threshold = r.replay_threshold;
    env_cfg.eval_seeds = (0..r.eval_seeds as u64)
        .map(|i| r.seed.wrapping_add(i))
        .collect();
    env_cfg.router = RouterOptions {
        swap_as_one: r.swap_as_one,
        ..RouterOptions::default()
    };
    if let Some(h) = r.horizon {
        env_cfg.horizon = h;
    }

    env_cfg
        .validate()
        .map_err(|e| CliError::Train(e.to_string()))?;
    let settings = settings_text(args, &r);
    write_snapshot(&args.out_dir, &settings)?;

    let env_cfg_factory = env_cfg.clone();
    let result = train(
        move || {
            TopologyEnv::new(env_cfg_factory.clone())
                .expect("environment config was validated before training")
        },
        &r.train,
    )
    .map_err(|e| CliError::Train(format!("{}: {e}", circuit.name())))?;

    let (best_objective, best_topology) = {
        let (d, g) = result
            .env
            .best()
            .expect("best is initialized at the first reset");
        (d, g.clone())
    };
    let stats = result.env.replay_stats();

    std::fs::write(
        args.out_dir.join("metrics.csv"),
        metrics_to_csv(&result.metrics),
    )?;
    std::fs::write(
        args.out_dir.join("best_topology.edgelist"),
        best_topology.to_edge_list(),
    )?;
    std::fs::write(
        args.out_dir.join("best_topology.bits.csv"),
        best_topology.to_bits_csv(),
    )?;
    std::fs::write(
        args.out_dir.join("best_episode.jsonl"),
        trace_to_jsonl(&result.best_trace),
    )?;
    let ckpt = Checkpoint {
        config_hash: config_hash(&settings),
        policy: result.nets.policy.clone(),
        value: result.nets.value.clone(),
    };
    std::fs::write(args.out_dir.join("checkpoint.txt"), save_checkpoint(&ckpt))?;

    Ok(TrainSummary {
        circuit: circuit.name().to_string(),
        qubits: circuit.num_qubits(),
        d0: result.env.d0(),
        best_objective,
        best_topology,
        metrics: result.metrics,
        total_router_evals: result.env.evaluations(),
        replay_hits: stats.hits,
        replay_misses: stats.misses,
    })
}

/// Convenience for tests and bench: train with explicit structs, no files.
pub fn train_in_memory(
    env_cfg: EnvConfig,
    train_cfg: &TrainConfig,
) -> Result<(f64, f64, TopologyGraph, Vec<IterationMetrics>), CliError> {
    env_cfg
        .validate()
        .map_err(|e| CliError::Train(e.to_string()))?;
    let cfg = env_cfg.clone();
    let result = train(
        move || TopologyEnv::new(cfg.clone()).expect("validated env config"),
        train_cfg,
    )
    .map_err(|e| CliError::Train(e.to_string()))?;
    let d0 = result.env.d0();
    let (best, graph) = result.env.best().expect("best initialized at reset");
    Ok((d0, best, graph.clone(), result.metrics))
}

pub fn default_out_dir(command: &str) -> PathBuf {
    if let Ok(root) = std::env::var("QTOPO_OUT") {
        return Path::new(&root).join(command);
    }
    PathBuf::from("qtopo-runs").join(command)
}

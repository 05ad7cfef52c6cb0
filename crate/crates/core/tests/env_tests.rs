//! Environment integration tests: objective traceability, the replay
//! off-switch equivalence, and the gates objective.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qtopo_core::circuit::generate_random_circuit;
use qtopo_core::env::{EnvConfig, Environment, Objective, RewardSign, StepOutcome, TopologyEnv};
use qtopo_core::ppo::{train, TrainConfig};
use qtopo_core::replay::ReplayStats;
use qtopo_core::router::{route, RouterOptions};
use qtopo_core::topology::{edge_pair, pair_count};

fn base_cfg(seed: u64) -> EnvConfig {
    let circuit = generate_random_circuit(5, 8.0, seed);
    let mut cfg = EnvConfig::new(circuit);
    cfg.replay_threshold = 0;
    cfg
}

/// info.depth for each legal step must match routing the edge-addition
/// prefix from scratch (replay disabled).
#[test]
fn episode_depths_match_prefix_rerouting() {
    let cfg = base_cfg(404);
    let mut env = TopologyEnv::new(cfg.clone()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    env.reset();

    let mut actions_taken: Vec<usize> = Vec::new();
    let mut depths: Vec<f64> = Vec::new();
    loop {
        let mask = env.legal_mask();
        let legal: Vec<usize> = (0..mask.len()).filter(|&a| mask[a]).collect();
        if legal.is_empty() {
            break;
        }
        let action = legal[rng.gen_range(0..legal.len())];
        let out = env.step(action);
        assert!(out.info.action_legal && out.info.evaluated);
        actions_taken.push(action);
        depths.push(out.info.depth);
        if out.done {
            break;
        }
    }

    // Re-route every prefix from a fresh line topology.
    let n = cfg.circuit.num_qubits();
    for (k, expected) in depths.iter().enumerate() {
        let mut g = qtopo_core::topology::make_line(n);
        for &a in &actions_taken[..=k] {
            let (i, j) = edge_pair(a, n);
            g.add_edge(i, j).unwrap();
        }
        let mean: f64 = cfg
            .eval_seeds
            .iter()
            .map(|&s| {
                route(&cfg.circuit, &g, &RouterOptions::default(), s)
                    .unwrap()
                    .depth as f64
            })
            .sum::<f64>()
            / cfg.eval_seeds.len() as f64;
        assert_eq!(mean, *expected, "prefix {k}");
    }
}

/// With objective = gates the same machinery runs; the scalar fed to the
/// reward is the routed gate total.
#[test]
fn gates_objective_swaps_the_scalar() {
    let mut cfg = base_cfg(7);
    cfg.objective = Objective::Gates;
    let mut env = TopologyEnv::new(cfg.clone()).unwrap();
    env.reset();
    let mask = env.legal_mask();
    let action = (0..mask.len()).find(|&a| mask[a]).unwrap();
    let out = env.step(action);

    let n = cfg.circuit.num_qubits();
    let mut g = qtopo_core::topology::make_line(n);
    let (i, j) = edge_pair(action, n);
    g.add_edge(i, j).unwrap();
    let mean_gates: f64 = cfg
        .eval_seeds
        .iter()
        .map(|&s| {
            route(&cfg.circuit, &g, &RouterOptions::default(), s)
                .unwrap()
                .total_gates as f64
        })
        .sum::<f64>()
        / cfg.eval_seeds.len() as f64;
    assert_eq!(out.info.depth, mean_gates);
}

/// Wrapper that clears the replay memory after every step, making a
/// replay-enabled env behave like a replay-free one.
struct ClearEachStep(TopologyEnv);

impl Environment for ClearEachStep {
    fn observation_len(&self) -> usize {
        self.0.observation_len()
    }
    fn num_actions(&self) -> usize {
        self.0.num_actions()
    }
    fn reset(&mut self) -> Vec<f64> {
        self.0.reset()
    }
    fn legal_mask(&self) -> Vec<bool> {
        self.0.legal_mask()
    }
    fn step(&mut self, action: usize) -> StepOutcome {
        let out = self.0.step(action);
        self.0.clear_replay();
        out
    }
    fn replay_stats(&self) -> ReplayStats {
        self.0.replay_stats()
    }
    fn evaluations(&self) -> usize {
        self.0.evaluations()
    }
    fn best_objective(&self) -> Option<f64> {
        self.0.best_objective()
    }
}

/// Replay disabled (threshold 0) is bit-for-bit equivalent to replay enabled
/// with the memory cleared after every step.
#[test]
fn replay_off_switch_equivalence() {
    let train_cfg = TrainConfig {
        iterations: 3,
        hidden: vec![16],
        batch_size: 48,
        minibatch_size: 16,
        epochs: 2,
        seed: 21,
        ..TrainConfig::default()
    };

    let mut off_cfg = base_cfg(11);
    off_cfg.replay_threshold = 0;
    let off = train(
        {
            let cfg = off_cfg.clone();
            move || TopologyEnv::new(cfg.clone()).unwrap()
        },
        &train_cfg,
    )
    .unwrap();

    let mut on_cfg = base_cfg(11);
    on_cfg.replay_threshold = 2;
    let cleared = train(
        {
            let cfg = on_cfg.clone();
            move || ClearEachStep(TopologyEnv::new(cfg.clone()).unwrap())
        },
        &train_cfg,
    )
    .unwrap();

    assert_eq!(off.metrics.len(), cleared.metrics.len());
    for (a, b) in off.metrics.iter().zip(&cleared.metrics) {
        assert_eq!(a.mean_reward, b.mean_reward);
        assert_eq!(a.best_depth, b.best_depth);
        assert_eq!(a.total_loss, b.total_loss);
        assert_eq!(a.kl, b.kl);
        assert_eq!(a.router_evals, b.router_evals);
    }
    assert_eq!(off.nets.policy, cleared.nets.policy);
    assert_eq!(off.nets.value, cleared.nets.value);
    assert_eq!(off.env.best_objective(), cleared.env.best_objective());
}

/// Step-triggered router evaluations equal replay misses exactly.
#[test]
fn evaluation_accounting_identity() {
    let mut cfg = base_cfg(99);
    cfg.replay_threshold = 2;
    let mut env = TopologyEnv::new(cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..50 {
        env.reset();
        loop {
            let mask = env.legal_mask();
            let legal: Vec<usize> = (0..mask.len()).filter(|&a| mask[a]).collect();
            if legal.is_empty() {
                break;
            }
            // mix in some illegal actions; they must not evaluate or look up
            let action = if rng.gen_bool(0.2) {
                rng.gen_range(0..mask.len())
            } else {
                legal[rng.gen_range(0..legal.len())]
            };
            if env.step(action).done {
                break;
            }
        }
    }
    let stats = env.replay_stats();
    let step_evals = env.evaluations() - env.reset_evaluations();
    assert_eq!(step_evals, stats.misses);
    assert!(stats.hits > 0, "fuzz should produce replay hits");
}

/// Degree cap and observation consistency under random env stepping with
/// real routing in the loop.
#[test]
fn env_degree_and_observation_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xE57);
    for trial in 0..60 {
        let circuit = generate_random_circuit(rng.gen_range(3..7), 4.0, trial);
        let mut cfg = EnvConfig::new(circuit);
        cfg.replay_threshold = rng.gen_range(0..3);
        cfg.reward_sign = if rng.gen_bool(0.5) {
            RewardSign::Negated
        } else {
            RewardSign::Verbatim
        };
        let n = cfg.circuit.num_qubits();
        let mut env = TopologyEnv::new(cfg).unwrap();
        env.reset();
        loop {
            let action = rng.gen_range(0..pair_count(n));
            let out = env.step(action);
            assert!(out.reward.is_finite());
            let graph = env.graph();
            assert!((0..n).all(|v| graph.degree(v) <= graph.max_degree()));
            let obs_bits: Vec<f64> = graph.flatten_state().iter().map(|&b| b as f64).collect();
            assert_eq!(out.observation, obs_bits);
            if out.done {
                break;
            }
        }
    }
}

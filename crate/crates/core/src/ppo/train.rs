//! The reward-replay PPO training loop.
//!
//! Each iteration collects whole episodes until the batch is full (the
//! environment consults its replay cache before every router evaluation),
//! computes GAE advantages, then runs several epochs of minibatch SGD on the
//! clipped surrogate with an adaptive KL penalty.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::env::{Environment, TraceStep};

use super::gae::{advantages, normalize_advantages};
use super::loss::{ppo_loss, BatchItem, LossError, LossParams};
use super::net::{Grads, Mlp};
use super::{masked_log_probs, sample_action, PpoError, Trajectory, Transition};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid config: {0}")]
    BadConfig(String),
    #[error("non-finite parameters after update (iteration {iteration}, epoch {epoch})")]
    NonFiniteParams { iteration: usize, epoch: usize },
    #[error(transparent)]
    Loss(#[from] LossError),
    #[error(transparent)]
    Policy(#[from] PpoError),
}

/// Training hyper-parameters. [`TrainConfig::default`] is the desk-scale
/// profile (64x64 networks, 512/64 batching) sized so a full run finishes in
/// seconds on a laptop CPU; [`TrainConfig::full_scale`] selects the
/// full-scale configuration (256x256 networks, 4000/128 batching, lr 5e-5,
/// plain SGD).
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub iterations: usize,
    pub hidden: Vec<usize>,
    pub gamma: f64,
    pub gae_lambda: f64,
    pub batch_size: usize,
    pub minibatch_size: usize,
    pub learning_rate: f64,
    /// SGD momentum; 0 is the plain update.
    pub momentum: f64,
    pub clip_eps: f64,
    pub kl_coef_init: f64,
    pub target_kl: f64,
    pub vf_coef: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            iterations: 50,
            hidden: vec![64, 64],
            gamma: 0.99,
            gae_lambda: 0.95,
            batch_size: 512,
            minibatch_size: 64,
            learning_rate: 0.01,
            momentum: 0.0,
            clip_eps: 0.2,
            kl_coef_init: 0.2,
            target_kl: 0.01,
            vf_coef: 0.5,
            epochs: 6,
            seed: 0,
        }
    }
}

impl TrainConfig {
    /// Full-scale profile: 256x256 networks, batch 4000, SGD minibatch 128,
    /// learning rate 5e-5.
    pub fn full_scale() -> Self {
        Self {
            hidden: vec![256, 256],
            batch_size: 4000,
            minibatch_size: 128,
            learning_rate: 5e-5,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        let positive = [
            ("iterations", self.iterations as f64),
            ("batch_size", self.batch_size as f64),
            ("minibatch_size", self.minibatch_size as f64),
            ("epochs", self.epochs as f64),
            ("gamma", self.gamma),
            ("gae_lambda", self.gae_lambda),
            ("learning_rate", self.learning_rate),
            ("kl_coef_init", self.kl_coef_init),
            ("target_kl", self.target_kl),
            ("vf_coef", self.vf_coef),
        ];
        for (name, v) in positive {
            if v <= 0.0 {
                return Err(TrainError::BadConfig(format!("{name} must be positive")));
            }
        }
        if !(self.clip_eps > 0.0 && self.clip_eps < 1.0) {
            return Err(TrainError::BadConfig("clip_eps must be in (0, 1)".into()));
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return Err(TrainError::BadConfig(
                "hidden sizes must be non-empty".into(),
            ));
        }
        Ok(())
    }
}

/// Per-iteration training metrics, one CSV row each.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationMetrics {
    pub iteration: usize,
    pub mean_reward: f64,
    pub best_depth: Option<f64>,
    pub total_loss: f64,
    pub kl: f64,
    pub wall_time_s: f64,
    pub sample_time_s: f64,
    pub router_evals: usize,
    pub replay_hits: usize,
    pub replay_misses: usize,
    pub replay_evictions: usize,
    /// Router evaluations avoided by cache hits this iteration.
    pub evals_saved: usize,
}

impl IterationMetrics {
    pub fn csv_header() -> &'static str {
        "iteration,mean_reward,best_depth,total_loss,kl,wall_time_s,sample_time_s,\
         router_evals,replay_hits,replay_misses,replay_evictions,evals_saved"
    }

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{:?},{},{:?},{:?},{:.6},{:.6},{},{},{},{},{}",
            self.iteration,
            self.mean_reward,
            self.best_depth
                .map(|d| format!("{d:?}"))
                .unwrap_or_default(),
            self.total_loss,
            self.kl,
            self.wall_time_s,
            self.sample_time_s,
            self.router_evals,
            self.replay_hits,
            self.replay_misses,
            self.replay_evictions,
            self.evals_saved,
        )
    }

    /// Equality ignoring the wall-clock columns, for reproducibility checks.
    pub fn same_modulo_time(&self, other: &Self) -> bool {
        self.iteration == other.iteration
            && self.mean_reward == other.mean_reward
            && self.best_depth == other.best_depth
            && self.total_loss == other.total_loss
            && self.kl == other.kl
            && self.router_evals == other.router_evals
            && self.replay_hits == other.replay_hits
            && self.replay_misses == other.replay_misses
            && self.replay_evictions == other.replay_evictions
            && self.evals_saved == other.evals_saved
    }
}

pub fn metrics_to_csv(rows: &[IterationMetrics]) -> String {
    let mut out = String::from(IterationMetrics::csv_header());
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv_row());
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone)]
pub struct TrainedPolicy {
    pub policy: Mlp,
    pub value: Mlp,
}

#[derive(Debug)]
pub struct TrainResult<E> {
    pub nets: TrainedPolicy,
    pub metrics: Vec<IterationMetrics>,
    /// Trace of the episode that last improved the best objective.
    pub best_trace: Vec<TraceStep>,
    pub final_kl_coef: f64,
    /// The environment after training; callers read best topology and replay
    /// statistics from it.
    pub env: E,
}

struct SgdState {
    velocity: Option<Grads>,
}

impl SgdState {
    fn new() -> Self {
        Self { velocity: None }
    }

    fn step(&mut self, net: &mut Mlp, grads: &Grads, lr: f64, momentum: f64) {
        if momentum == 0.0 {
            net.sgd_step(grads, lr);
            return;
        }
        let velocity = self.velocity.get_or_insert_with(|| Grads::zeros_like(net));
        velocity.scale(momentum);
        velocity.add(grads);
        net.sgd_step(velocity, lr);
    }
}

/// Mean KL(pi_old || pi) across a trajectory's states.
fn mean_kl(traj: &Trajectory, policy: &Mlp, policy_old: &Mlp) -> Result<f64, PpoError> {
    let mut total = 0.0;
    for step in &traj.steps {
        let lp = masked_log_probs(&policy.forward(&step.obs), &step.mask)?;
        let lp_old = masked_log_probs(&policy_old.forward(&step.obs), &step.mask)?;
        total += lp_old
            .iter()
            .zip(&lp)
            .filter(|(o, _)| o.is_finite())
            .map(|(&o, &n)| o.exp() * (o - n))
            .sum::<f64>();
    }
    Ok(total / traj.len() as f64)
}

/// Run reward-replay PPO against a fresh environment from `make_env`.
pub fn train<E: Environment>(
    mut make_env: impl FnMut() -> E,
    cfg: &TrainConfig,
) -> Result<TrainResult<E>, TrainError> {
    cfg.validate()?;
    let mut env = make_env();
    let obs_len = env.observation_len();
    let num_actions = env.num_actions();

    let mut policy_sizes = vec![obs_len];
    policy_sizes.extend_from_slice(&cfg.hidden);
    policy_sizes.push(num_actions);
    let mut value_sizes = vec![obs_len];
    value_sizes.extend_from_slice(&cfg.hidden);
    value_sizes.push(1);

    let mut policy = Mlp::new(&policy_sizes, cfg.seed.wrapping_add(0x9e3779b9), 0.01);
    let mut value = Mlp::new(&value_sizes, cfg.seed.wrapping_add(0x7f4a7c15), 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut kl_coef = cfg.kl_coef_init;
    let mut policy_sgd = SgdState::new();
    let mut value_sgd = SgdState::new();

    let mut metrics = Vec::with_capacity(cfg.iterations);
    let mut best_trace: Vec<TraceStep> = Vec::new();
    let mut prev_evals = env.evaluations();
    let mut prev_stats = env.replay_stats();

    for iteration in 0..cfg.iterations {
        let iter_start = Instant::now();
        let policy_old = policy.clone();

        // Collect whole episodes until the batch is full (Algorithm 2 shape:
        // cached rewards are consulted inside the environment step).
        let mut traj = Trajectory::default();
        let mut reward_sum = 0.0;
        while traj.len() < cfg.batch_size {
            let mut obs = env.reset();
            let best_before = env.best_objective();
            let mut episode_trace: Vec<TraceStep> = Vec::new();
            loop {
                let mask = env.legal_mask();
                let logps = masked_log_probs(&policy_old.forward(&obs), &mask)?;
                let probs: Vec<f64> = logps
                    .iter()
                    .map(|&lp| if lp.is_finite() { lp.exp() } else { 0.0 })
                    .collect();
                let action = sample_action(&probs, &mask, &mut rng);
                let log_prob = logps[action];
                let value_est = value.forward(&obs)[0];
                let out = env.step(action);
                reward_sum += out.reward;
                episode_trace.push(TraceStep {
                    action,
                    legal: out.info.action_legal,
                    depth: out.info.depth,
                    reward: out.reward,
                    replayed: out.info.action_legal && !out.info.evaluated,
                });
                traj.steps.push(Transition {
                    obs: std::mem::take(&mut obs),
                    action,
                    reward: out.reward,
                    next_obs: out.observation.clone(),
                    log_prob,
                    value: value_est,
                    mask,
                    done: out.done,
                });
                obs = out.observation;
                if out.done {
                    break;
                }
            }
            match (best_before, env.best_objective()) {
                (Some(before), Some(after)) if after < before => best_trace = episode_trace,
                (None, Some(_)) => best_trace = episode_trace,
                _ => {}
            }
        }
        let sample_time_s = iter_start.elapsed().as_secs_f64();

        // Episodes always run to completion, so no bootstrap value is needed.
        let (mut advs, rtgs) = advantages(&traj, cfg.gamma, cfg.gae_lambda, 0.0);
        normalize_advantages(&mut advs);

        let mut loss_sum = 0.0;
        let mut loss_count = 0usize;
        let mut indices: Vec<usize> = (0..traj.len()).collect();
        for epoch in 0..cfg.epochs {
            indices.shuffle(&mut rng);
            for chunk in indices.chunks(cfg.minibatch_size) {
                let items: Vec<BatchItem<'_>> = chunk
                    .iter()
                    .map(|&i| {
                        let s = &traj.steps[i];
                        BatchItem {
                            obs: &s.obs,
                            mask: &s.mask,
                            action: s.action,
                            log_prob_old: s.log_prob,
                            advantage: advs[i],
                            reward_to_go: rtgs[i],
                        }
                    })
                    .collect();
                let params = LossParams {
                    clip_eps: cfg.clip_eps,
                    kl_coef,
                    vf_coef: cfg.vf_coef,
                };
                let (loss, pg, vg, _) = ppo_loss(&items, &policy, &policy_old, &value, &params)?;
                policy_sgd.step(&mut policy, &pg, cfg.learning_rate, cfg.momentum);
                value_sgd.step(&mut value, &vg, cfg.learning_rate, cfg.momentum);
                if !policy.all_finite() || !value.all_finite() {
                    return Err(TrainError::NonFiniteParams { iteration, epoch });
                }
                loss_sum += loss;
                loss_count += 1;
            }
        }

        let kl = mean_kl(&traj, &policy, &policy_old)?;
        if kl > 1.5 * cfg.target_kl {
            kl_coef = (kl_coef * 2.0).min(1e3);
        } else if kl < cfg.target_kl / 1.5 {
            kl_coef = (kl_coef * 0.5).max(1e-6);
        }

        let evals_now = env.evaluations();
        let stats_now = env.replay_stats();
        metrics.push(IterationMetrics {
            iteration,
            mean_reward: reward_sum / traj.len() as f64,
            best_depth: env.best_objective(),
            total_loss: loss_sum / loss_count.max(1) as f64,
            kl,
            wall_time_s: iter_start.elapsed().as_secs_f64(),
            sample_time_s,
            router_evals: evals_now - prev_evals,
            replay_hits: stats_now.hits - prev_stats.hits,
            replay_misses: stats_now.misses - prev_stats.misses,
            replay_evictions: stats_now.evictions - prev_stats.evictions,
            evals_saved: stats_now.hits - prev_stats.hits,
        });
        prev_evals = evals_now;
        prev_stats = stats_now;
    }

    Ok(TrainResult {
        nets: TrainedPolicy { policy, value },
        metrics,
        best_trace,
        final_kl_coef: kl_coef,
        env,
    })
}

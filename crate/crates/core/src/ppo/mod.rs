//! Proximal policy optimization over a masked discrete action space, written
//! from scratch on the f64 networks in [`net`].

mod checkpoint;
mod gae;
mod loss;
mod net;
mod train;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint};
pub use gae::{advantages, normalize_advantages};
pub use loss::{ppo_loss, BatchItem, LossError, LossParams, LossStats};
pub use net::{ForwardCache, Grads, Layer, Mlp};
pub use train::{
    metrics_to_csv, train, IterationMetrics, TrainConfig, TrainError, TrainResult, TrainedPolicy,
};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PpoError {
    #[error("mask allows no legal action")]
    EmptyMask,
    #[error("logits and mask lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
}

/// Log-probabilities of the policy restricted to legal actions; illegal
/// entries are negative infinity. Numerically stable log-softmax.
pub fn masked_log_probs(logits: &[f64], mask: &[bool]) -> Result<Vec<f64>, PpoError> {
    if logits.len() != mask.len() {
        return Err(PpoError::LengthMismatch(logits.len(), mask.len()));
    }
    let max = logits
        .iter()
        .zip(mask)
        .filter(|(_, &m)| m)
        .map(|(&l, _)| l)
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(PpoError::EmptyMask);
    }
    let log_sum = logits
        .iter()
        .zip(mask)
        .filter(|(_, &m)| m)
        .map(|(&l, _)| (l - max).exp())
        .sum::<f64>()
        .ln()
        + max;
    Ok(logits
        .iter()
        .zip(mask)
        .map(|(&l, &m)| if m { l - log_sum } else { f64::NEG_INFINITY })
        .collect())
}

/// Probability vector of the masked softmax; illegal actions get exactly 0.
pub fn masked_policy(logits: &[f64], mask: &[bool]) -> Result<Vec<f64>, PpoError> {
    let logps = masked_log_probs(logits, mask)?;
    Ok(logps
        .into_iter()
        .map(|lp| {
            if lp == f64::NEG_INFINITY {
                0.0
            } else {
                lp.exp()
            }
        })
        .collect())
}

/// Sample an action index from a masked probability vector. Always returns a
/// legal action.
pub fn sample_action(probs: &[f64], mask: &[bool], rng: &mut ChaCha8Rng) -> usize {
    let r: f64 = rng.gen_range(0.0..1.0);
    let mut acc = 0.0;
    let mut last_legal = None;
    for (i, (&p, &m)) in probs.iter().zip(mask).enumerate() {
        if !m {
            continue;
        }
        last_legal = Some(i);
        acc += p;
        if r < acc {
            return i;
        }
    }
    last_legal.expect("sample_action requires at least one legal action")
}

/// One environment transition recorded during collection.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub obs: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    pub next_obs: Vec<f64>,
    /// Log-probability of `action` under the collection policy and mask.
    pub log_prob: f64,
    /// Value estimate of `obs` at collection time.
    pub value: f64,
    pub mask: Vec<bool>,
    pub done: bool,
}

/// A batch of transitions, episode boundaries marked by `done`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub steps: Vec<Transition>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

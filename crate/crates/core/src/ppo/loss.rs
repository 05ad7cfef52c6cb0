//! Clipped-surrogate PPO loss with KL penalty and value regression, plus its
//! analytic gradients.

use thiserror::Error;

use super::net::{Grads, Mlp};
use super::{masked_log_probs, PpoError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossParams {
    pub clip_eps: f64,
    pub kl_coef: f64,
    pub vf_coef: f64,
}

/// One minibatch element; `advantage` is expected to be normalized already.
#[derive(Debug, Clone)]
pub struct BatchItem<'a> {
    pub obs: &'a [f64],
    pub mask: &'a [bool],
    pub action: usize,
    pub log_prob_old: f64,
    pub advantage: f64,
    pub reward_to_go: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LossStats {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub kl: f64,
    pub clip_fraction: f64,
}

#[derive(Debug, Error)]
pub enum LossError {
    #[error("non-finite loss: {detail}")]
    NonFinite { detail: String },
    #[error(transparent)]
    Policy(#[from] PpoError),
}

/// Mean loss over the minibatch and its gradients for the policy and value
/// networks:
/// `L = -E[min(r A, clip(r) A)] + kl_coef * KL(pi_old || pi) + vf_coef * (V - R)^2`.
///
/// The ratio uses the log-probability recorded at collection time; the KL
/// term re-evaluates the old policy's full masked distribution.
pub fn ppo_loss(
    items: &[BatchItem<'_>],
    policy: &Mlp,
    policy_old: &Mlp,
    value: &Mlp,
    params: &LossParams,
) -> Result<(f64, Grads, Grads, LossStats), LossError> {
    assert!(!items.is_empty(), "minibatch must be non-empty");
    let mut policy_grads = Grads::zeros_like(policy);
    let mut value_grads = Grads::zeros_like(value);
    let mut stats = LossStats::default();
    let mut total = 0.0;

    for item in items {
        let (logits, cache) = policy.forward_cached(item.obs);
        let logps = masked_log_probs(&logits, item.mask)?;
        let logits_old = policy_old.forward(item.obs);
        let logps_old = masked_log_probs(&logits_old, item.mask)?;

        let logp_a = logps[item.action];
        let ratio = (logp_a - item.log_prob_old).exp();
        let unclipped = ratio * item.advantage;
        let clipped = ratio.clamp(1.0 - params.clip_eps, 1.0 + params.clip_eps) * item.advantage;
        let clip_loss = -unclipped.min(clipped);
        // d(clip_loss)/d(logp_a): active only when the unclipped branch wins.
        let dclip_dlogp = if unclipped <= clipped {
            -item.advantage * ratio
        } else {
            0.0
        };
        if ratio < 1.0 - params.clip_eps || ratio > 1.0 + params.clip_eps {
            stats.clip_fraction += 1.0;
        }

        let mut kl = 0.0;
        let mut dlogits = vec![0.0; logits.len()];
        for i in 0..logits.len() {
            if !item.mask[i] {
                continue;
            }
            let p = logps[i].exp();
            let p_old = logps_old[i].exp();
            kl += p_old * (logps_old[i] - logps[i]);
            let onehot = if i == item.action { 1.0 } else { 0.0 };
            dlogits[i] = dclip_dlogp * (onehot - p) + params.kl_coef * (p - p_old);
        }
        policy.backward(&cache, &dlogits, &mut policy_grads);

        let (v_out, v_cache) = value.forward_cached(item.obs);
        let v = v_out[0];
        let v_err = v - item.reward_to_go;
        let value_loss = params.vf_coef * v_err * v_err;
        value.backward(&v_cache, &[2.0 * params.vf_coef * v_err], &mut value_grads);

        let sample_loss = clip_loss + params.kl_coef * kl + value_loss;
        if !sample_loss.is_finite() {
            return Err(LossError::NonFinite {
                detail: format!(
                    "sample loss {sample_loss} (clip {clip_loss}, kl {kl}, value {value_loss}) \
                     for action {} with advantage {}, ratio {ratio}, obs {:?}",
                    item.action, item.advantage, item.obs
                ),
            });
        }
        total += sample_loss;
        stats.policy_loss += clip_loss;
        stats.value_loss += value_loss;
        stats.kl += kl;
    }

    let n = items.len() as f64;
    policy_grads.scale(1.0 / n);
    value_grads.scale(1.0 / n);
    stats.policy_loss /= n;
    stats.value_loss /= n;
    stats.kl /= n;
    stats.clip_fraction /= n;
    let mean = total / n;
    if !policy_grads.is_finite() || !value_grads.is_finite() {
        return Err(LossError::NonFinite {
            detail: format!("non-finite gradients on a {} item minibatch", items.len()),
        });
    }
    Ok((mean, policy_grads, value_grads, stats))
}

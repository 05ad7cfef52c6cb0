//! Generalized advantage estimation and rewards-to-go.

use super::Trajectory;

/// GAE(gamma, lambda) advantages and discounted rewards-to-go.
///
/// Both recursions reset at episode boundaries (`done`). If the batch ends
/// mid-episode, `tail_value` bootstraps the value of the state after the last
/// transition; it is ignored when the last step is terminal.
pub fn advantages(
    traj: &Trajectory,
    gamma: f64,
    lambda: f64,
    tail_value: f64,
) -> (Vec<f64>, Vec<f64>) {
    assert!(!traj.is_empty(), "trajectory must be non-empty");
    let n = traj.len();
    let mut advs = vec![0.0; n];
    let mut rtgs = vec![0.0; n];
    let mut gae = 0.0;
    let mut next_return = tail_value;
    let mut next_value = tail_value;
    for t in (0..n).rev() {
        let step = &traj.steps[t];
        if step.done {
            next_value = 0.0;
            next_return = 0.0;
            gae = 0.0;
        }
        let delta = step.reward + gamma * next_value - step.value;
        gae = delta + gamma * lambda * gae;
        advs[t] = gae;
        next_return = step.reward + gamma * next_return;
        rtgs[t] = next_return;
        next_value = step.value;
    }
    (advs, rtgs)
}

/// Normalize to mean 0, std 1 (population std, epsilon-guarded).
pub fn normalize_advantages(advs: &mut [f64]) {
    let n = advs.len() as f64;
    let mean = advs.iter().sum::<f64>() / n;
    let var = advs.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n;
    let std = var.sqrt().max(1e-8);
    for a in advs.iter_mut() {
        *a = (*a - mean) / std;
    }
}

use rand::Rng;

use crate::error::{Error, Result};
use crate::neural::softmax;

/// `p(a) ∝ exp(Q(a) / τ)`.
pub fn boltzmann_probs(q: &[f64], tau: f64) -> Vec<f64> {
    let scaled: Vec<f64> = q.iter().map(|v| v / tau).collect();
    softmax(&scaled)
}

/// Samples an action index from the Boltzmann distribution.
pub fn select_action<R: Rng>(q: &[f64], tau: f64, rng: &mut R) -> Result<usize> {
    if q.is_empty() {
        return Err(Error::Empty("valid action list"));
    }
    if tau <= 0.0 {
        return Err(Error::Config("temperature must be positive".into()));
    }
    let probs = boltzmann_probs(q, tau);
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return Ok(i);
        }
    }
    Ok(probs.len() - 1)
}

/// Argmax with the lowest index winning ties.
pub fn greedy_action(q: &[f64]) -> Result<usize> {
    if q.is_empty() {
        return Err(Error::Empty("valid action list"));
    }
    let mut best = 0;
    for (i, v) in q.iter().enumerate() {
        if *v > q[best] {
            best = i;
        }
    }
    Ok(best)
}

/// `r` if done, else `r + γ · max Q(next)`.
pub fn td_target(reward: f64, done: bool, gamma: f64, next_q: &[f64]) -> Result<f64> {
    if done {
        return Ok(reward);
    }
    let m = next_q
        .iter()
        .copied()
        .fold(None, |a: Option<f64>, v| Some(a.map_or(v, |a| a.max(v))))
        .ok_or(Error::Empty("next valid action list"))?;
    Ok(reward + gamma * m)
}

use rand::Rng;

use crate::learner::masked_argmax;
use crate::{AgentError, QNetwork};

/// Epsilon-greedy action selection over the legal set: explore uniformly with
/// probability `epsilon`, otherwise take the masked argmax (lowest index wins
/// ties).
pub fn select_action<R: Rng>(
    net: &QNetwork,
    state: &[f64],
    epsilon: f64,
    legal_mask: &[bool],
    rng: &mut R,
) -> Result<usize, AgentError> {
    let legal: Vec<usize> = legal_mask
        .iter()
        .enumerate()
        .filter_map(|(i, &ok)| ok.then_some(i))
        .collect();
    if legal.is_empty() {
        return Err(AgentError::NoLegalAction);
    }
    if rng.gen::<f64>() < epsilon {
        return Ok(legal[rng.gen_range(0..legal.len())]);
    }
    let q = net.forward(state)?;
    masked_argmax(&q, Some(legal_mask))
}

/// Multiplicative epsilon decay bounded below:
/// `eps_{k+1} = max(eps_min, eps_k * decay)`.
#[derive(Debug, Clone, Copy)]
pub struct EpsilonSchedule {
    current: f64,
    min: f64,
    decay: f64,
}

impl EpsilonSchedule {
    pub fn new(start: f64, min: f64, decay: f64) -> Self {
        Self { current: start.max(min), min, decay }
    }

    pub fn current(&self) -> f64 {
        self.current
    }

    pub fn decay(&mut self) {
        self.current = (self.current * self.decay).max(self.min);
    }
}

use rand_chacha::ChaCha8Rng;

use rand::Rng;
use rf_train::{Environment, StepOutcome};

/// Thirty-second diagnostic task: walk a 1-D chain to the far end. Reward 1
/// on arrival, 0 elsewhere; a slip probability flips the chosen move. Small
/// enough that every replay strategy can be exercised against a
/// value-iteration oracle.
#[derive(Debug, Clone, Copy)]
pub struct ChainConfig {
    pub length: usize,
    pub slip: f64,
    pub max_steps: usize,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self { length: 6, slip: 0.0, max_steps: 48 }
    }
}

pub struct ChainMdp {
    config: ChainConfig,
    position: usize,
    steps: usize,
    finished: bool,
}

pub const ACTION_LEFT: usize = 0;
pub const ACTION_RIGHT: usize = 1;

impl ChainMdp {
    pub fn new(config: ChainConfig) -> Self {
        assert!(config.length >= 2);
        Self { config, position: 0, steps: 0, finished: true }
    }

    pub fn config(&self) -> ChainConfig {
        self.config
    }

    fn observe(&self) -> Vec<f64> {
        let mut obs = vec![0.0; self.config.length];
        obs[self.position] = 1.0;
        obs
    }
}

impl Environment for ChainMdp {
    fn reset(&mut self, _rng: &mut ChaCha8Rng) -> Vec<f64> {
        self.position = 0;
        self.steps = 0;
        self.finished = false;
        self.observe()
    }

    fn step(&mut self, action: usize, rng: &mut ChaCha8Rng) -> StepOutcome {
        assert!(!self.finished, "step on a finished episode");
        assert!(action < 2);
        self.steps += 1;
        let slipped = self.config.slip > 0.0 && rng.gen::<f64>() < self.config.slip;
        let go_right = (action == ACTION_RIGHT) != slipped;
        if go_right {
            self.position += 1;
        } else {
            self.position = self.position.saturating_sub(1);
        }
        let reached = self.position == self.config.length - 1;
        let truncated = self.steps >= self.config.max_steps;
        let done = reached || truncated;
        self.finished = done;
        StepOutcome {
            observation: self.observe(),
            reward: if reached { 1.0 } else { 0.0 },
            done,
            success: reached,
            eval_performed: false,
            metric: done.then_some(self.steps as f64),
            stats: None,
        }
    }

    fn observation_dim(&self) -> usize {
        self.config.length
    }

    fn action_count(&self) -> usize {
        2
    }

    fn legal_mask(&self) -> Vec<bool> {
        vec![true, true]
    }

    fn env_id(&self) -> String {
        format!("diag/chain{}", self.config.length)
    }
}

/// Value iteration on the known chain dynamics (infinite horizon, no step
/// cap): returns `V*(s)` for every non-terminal state.
pub fn value_iteration(config: &ChainConfig, gamma: f64) -> Vec<f64> {
    let n = config.length;
    let terminal = n - 1;
    let mut v = vec![0.0; n];
    for _ in 0..10_000 {
        let mut next = v.clone();
        let mut delta: f64 = 0.0;
        for s in 0..terminal {
            let mut best = f64::NEG_INFINITY;
            for a in [ACTION_LEFT, ACTION_RIGHT] {
                let mut q = 0.0;
                for (prob, go_right) in
                    [(1.0 - config.slip, a == ACTION_RIGHT), (config.slip, a != ACTION_RIGHT)]
                {
                    if prob == 0.0 {
                        continue;
                    }
                    let s2 = if go_right { s + 1 } else { s.saturating_sub(1) };
                    let reward = if s2 == terminal { 1.0 } else { 0.0 };
                    let future = if s2 == terminal { 0.0 } else { v[s2] };
                    q += prob * (reward + gamma * future);
                }
                best = best.max(q);
            }
            next[s] = best;
            delta = delta.max((next[s] - v[s]).abs());
        }
        v = next;
        if delta < 1e-12 {
            break;
        }
    }
    v.truncate(terminal);
    v
}

use crate::{Activation, LossKind};

/// When the target network hard-copies the online parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetSync {
    EverySteps(u64),
    EveryEpisodes(u64),
}

/// Learner hyperparameters; table-sourced defaults live in the harness presets.
#[derive(Debug, Clone)]
pub struct AgentConfig {
    pub gamma: f64,
    pub lr: f64,
    pub batch_size: usize,
    pub hidden: Vec<usize>,
    pub activation: Activation,
    pub target_sync: TargetSync,
    pub grad_clip: f64,
    pub eps_start: f64,
    pub eps_min: f64,
    pub eps_decay: f64,
    /// Decay epsilon once per environment step or once per episode.
    pub eps_decay_per_step: bool,
    pub n_step: usize,
    pub double_q: bool,
    pub loss: LossKind,
    /// Learner updates begin once the buffer holds this many transitions
    /// (at least `batch_size`).
    pub warmup: usize,
    /// Run a learner update every k-th environment step.
    pub learn_every: u64,
}

impl AgentConfig {
    pub fn validate(&self) {
        assert!(self.gamma > 0.0 && self.gamma <= 1.0, "gamma in (0, 1]");
        assert!(self.eps_min <= self.eps_start, "eps_min <= eps_start");
        assert!(self.n_step >= 1, "n_step >= 1");
        assert!(self.batch_size >= 1);
        assert!(self.learn_every >= 1);
    }

    /// Effective bootstrap discount: `gamma^n` for n-step returns.
    pub fn gamma_effective(&self) -> f64 {
        self.gamma.powi(self.n_step as i32)
    }
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            lr: 3e-4,
            batch_size: 200,
            hidden: vec![128, 128],
            activation: Activation::Relu,
            target_sync: TargetSync::EveryEpisodes(100),
            grad_clip: 1.0,
            eps_start: 1.0,
            eps_min: 0.01,
            eps_decay: 0.99931,
            eps_decay_per_step: false,
            n_step: 1,
            double_q: false,
            loss: LossKind::Huber,
            warmup: 200,
            learn_every: 1,
        }
    }
}

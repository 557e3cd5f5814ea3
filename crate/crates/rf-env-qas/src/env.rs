use std::collections::HashMap;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rf_qcore::{exact_ground_energy, NoiseModel, PauliSumHamiltonian};
use rf_train::{Environment, SolutionStats, StepOutcome};

use crate::{
    enumerate_actions, optimize_parameters, CircuitTensorState, CostEvaluator, Curriculum,
    CurriculumConfig, EncodingKind, EpisodeResult, GateCounts, QasAction, QasError,
    VqeOptimizerConfig,
};

/// Whether step `tau` (1-based within the episode) triggers a full
/// quantum-classical evaluation: every `m`-th step and the terminal step.
pub fn update_indicator(tau: u32, m: u32, terminal: bool) -> bool {
    debug_assert!(m >= 1);
    terminal || tau % m == 0
}

/// Normalized improvement reward between evaluations,
/// `max((C_prev - C) / (C_prev - C_min), -1)`; stays in `[-1, 1]` whenever
/// `C_min` is a true lower bound on achievable cost.
pub fn shaping_reward(prev_cost: f64, cost: f64, c_min: f64) -> f64 {
    let denom = prev_cost - c_min;
    if denom <= 0.0 {
        return 0.0;
    }
    ((prev_cost - cost) / denom).max(-1.0)
}

#[derive(Debug, Clone)]
pub struct QasConfig {
    pub n_qubits: usize,
    pub l_max: usize,
    pub encoding: EncodingKind,
    pub hamiltonian: PauliSumHamiltonian,
    /// Amortization interval: evaluations run every `m` architectural edits.
    pub m: u32,
    /// Maximum steps per episode.
    pub t_s: u32,
    /// Desired minimum cost in the shaping reward; defaults to the
    /// coefficient lower bound `-sum |c_k|`.
    pub c_min: Option<f64>,
    pub noise: Option<NoiseModel>,
    /// Trajectory count of the Monte-Carlo noise backend (above 6 qubits).
    pub trajectories: usize,
    pub optimizer: VqeOptimizerConfig,
    pub curriculum: CurriculumConfig,
    /// Reference energy for error reporting; exact diagonalization when absent.
    pub e_ref: Option<f64>,
}

impl QasConfig {
    pub fn new(hamiltonian: PauliSumHamiltonian, encoding: EncodingKind, l_max: usize) -> Self {
        Self {
            n_qubits: hamiltonian.n_qubits(),
            l_max,
            encoding,
            hamiltonian,
            m: 10,
            t_s: 100,
            c_min: None,
            noise: None,
            trajectories: 256,
            optimizer: VqeOptimizerConfig::default(),
            curriculum: CurriculumConfig::default(),
            e_ref: None,
        }
    }
}

/// Per-episode summary appended at every episode end; the source of the
/// per-episode CSV emitted by the harness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QasEpisodeLog {
    pub steps: u32,
    pub evals: u32,
    pub best_cost: f64,
    pub error_vs_exact: f64,
    pub total_gates: u32,
    pub cnot: u32,
    pub rot: u32,
    pub xi: f64,
}

/// The architecture-search MDP with amortized evaluation: the agent edits the
/// circuit tensor every step, but the variational optimization and cost
/// readout run only when the update indicator fires. Between evaluations the
/// observation carries the last evaluated cost.
pub struct QasEnv {
    config: QasConfig,
    actions: Vec<QasAction>,
    curriculum: Curriculum,
    e_ref: f64,
    c_min: f64,
    empty_cost: f64,
    state: CircuitTensorState,
    /// Optimized angles keyed by placement identity, carried across
    /// evaluations as the circuit grows.
    thetas: HashMap<(usize, usize, usize), f64>,
    tau: u32,
    evals_this_episode: u32,
    episode_best_cost: f64,
    episode_success: bool,
    finished: bool,
    episode_log: Vec<QasEpisodeLog>,
    vqe_rng: ChaCha8Rng,
}

impl QasEnv {
    pub fn new(config: QasConfig) -> Result<Self, QasError> {
        let e_ref = match config.e_ref {
            Some(v) => v,
            None => exact_ground_energy(&config.hamiltonian)?,
        };
        let c_min = config.c_min.unwrap_or_else(|| config.hamiltonian.coefficient_lower_bound());
        let actions = enumerate_actions(config.n_qubits, config.encoding);
        let state = CircuitTensorState::new(config.n_qubits, config.l_max, config.encoding);
        let curriculum = Curriculum::new(config.curriculum, e_ref);
        // the empty circuit is gate-free, so both noise backends agree exactly
        let evaluator = CostEvaluator::new(&config.hamiltonian, None, config.trajectories);
        let mut tmp_rng = ChaCha8Rng::seed_from_u64(0);
        let empty_cost = evaluator.cost(&[], &mut tmp_rng)?;
        Ok(Self {
            config,
            actions,
            curriculum,
            e_ref,
            c_min,
            empty_cost,
            state,
            thetas: HashMap::new(),
            tau: 0,
            evals_this_episode: 0,
            episode_best_cost: f64::INFINITY,
            episode_success: false,
            finished: true,
            episode_log: Vec::new(),
            vqe_rng: ChaCha8Rng::seed_from_u64(0),
        })
    }

    pub fn episode_log(&self) -> &[QasEpisodeLog] {
        &self.episode_log
    }

    pub fn config(&self) -> &QasConfig {
        &self.config
    }

    pub fn exact_energy(&self) -> f64 {
        self.e_ref
    }

    pub fn c_min(&self) -> f64 {
        self.c_min
    }

    pub fn xi(&self) -> f64 {
        self.curriculum.xi()
    }

    pub fn curriculum(&self) -> &Curriculum {
        &self.curriculum
    }

    pub fn state(&self) -> &CircuitTensorState {
        &self.state
    }

    pub fn counts(&self) -> GateCounts {
        self.state.counts()
    }

    pub fn qas_actions(&self) -> &[QasAction] {
        &self.actions
    }

    /// Gate tallies and best error of a finished episode.
    pub fn episode_stats(&self) -> (GateCounts, f64) {
        (self.state.counts(), self.episode_best_cost - self.e_ref)
    }

    fn encode(&mut self, action: &QasAction) -> Result<(), QasError> {
        match action {
            QasAction::I(a) => self.state.encode_action_i(a).map(|_| ()),
            QasAction::II(a) => self.state.encode_action_ii(a).map(|_| ()),
        }
    }

    /// Run the variational optimization on the current tensor. Warm starts
    /// come from the per-placement angle store; new placements start at 0 so
    /// adding a gate never changes the state before optimization.
    fn evaluate_now(&mut self) -> Result<f64, QasError> {
        let keys = self.state.placement_keys();
        let init: Vec<f64> = if self.config.optimizer.warm_start {
            keys.iter().map(|k| self.thetas.get(k).copied().unwrap_or(0.0)).collect()
        } else {
            vec![0.0; keys.len()]
        };
        let evaluator =
            CostEvaluator::new(&self.config.hamiltonian, self.config.noise, self.config.trajectories);
        let state = &self.state;
        let vqe_rng = &mut self.vqe_rng;
        let mut cost_fn = |t: &[f64]| -> Result<f64, QasError> {
            let gates = state.build_circuit(t)?;
            evaluator.cost(&gates, vqe_rng)
        };
        let (theta_star, cost) = optimize_parameters(&mut cost_fn, &init, &self.config.optimizer)?;
        for (k, v) in keys.iter().zip(&theta_star) {
            self.thetas.insert(*k, *v);
        }
        Ok(cost)
    }

    /// One architectural edit with amortized evaluation; `Err` on a finished
    /// episode or an illegal placement.
    pub fn step_checked(&mut self, action: usize) -> Result<StepOutcome, QasError> {
        if self.finished {
            return Err(QasError::FinishedEpisode);
        }
        let action = *self.actions.get(action).ok_or(QasError::BadAction("index"))?;
        self.tau += 1;
        self.encode(&action)?;
        let terminal_step = self.tau >= self.config.t_s;
        let evaluate = update_indicator(self.tau, self.config.m, terminal_step);

        if !evaluate {
            self.state.steps_since_eval += 1;
            return Ok(StepOutcome {
                observation: self.state.observation(),
                reward: 0.0,
                done: false,
                success: false,
                eval_performed: false,
                metric: None,
                stats: None,
            });
        }

        let prev_cost = self.state.last_eval_cost;
        let cost = self.evaluate_now()?;
        self.evals_this_episode += 1;
        self.state.cost = cost;
        self.state.last_eval_cost = cost;
        self.state.steps_since_eval = 0;
        self.episode_best_cost = self.episode_best_cost.min(cost);

        let xi = self.curriculum.xi();
        let success = cost < xi;
        let done = success || terminal_step;
        let reward = if success {
            5.0
        } else if terminal_step {
            -5.0
        } else {
            shaping_reward(prev_cost, cost, self.c_min)
        };
        if done {
            self.finished = true;
            self.episode_success = success;
            self.curriculum
                .update(&EpisodeResult { success, best_cost: self.episode_best_cost });
            let counts = self.state.counts();
            self.episode_log.push(QasEpisodeLog {
                steps: self.tau,
                evals: self.evals_this_episode,
                best_cost: self.episode_best_cost,
                error_vs_exact: self.episode_best_cost - self.e_ref,
                total_gates: counts.total(),
                cnot: counts.two_qubit,
                rot: counts.rotations,
                xi,
            });
        }
        let counts = self.state.counts();
        Ok(StepOutcome {
            observation: self.state.observation(),
            reward,
            done,
            success,
            eval_performed: true,
            metric: Some(cost - self.e_ref),
            stats: Some(SolutionStats {
                total_gates: counts.total(),
                cnot: counts.two_qubit,
                rot: counts.rotations,
            }),
        })
    }
}

impl Environment for QasEnv {
    fn reset(&mut self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        self.state.clear();
        self.thetas.clear();
        self.tau = 0;
        self.evals_this_episode = 0;
        self.episode_best_cost = f64::INFINITY;
        self.episode_success = false;
        self.finished = false;
        self.state.cost = self.empty_cost;
        self.state.last_eval_cost = self.empty_cost;
        // derive a fresh evaluation stream so Monte-Carlo noise stays
        // reproducible per episode
        self.vqe_rng = ChaCha8Rng::seed_from_u64(rand_chacha::rand_core::RngCore::next_u64(rng));
        self.state.observation()
    }

    fn step(&mut self, action: usize, _rng: &mut ChaCha8Rng) -> StepOutcome {
        self.step_checked(action).expect("legal action on a live episode")
    }

    fn observation_dim(&self) -> usize {
        CircuitTensorState::observation_dim(self.config.n_qubits, self.config.l_max)
    }

    fn action_count(&self) -> usize {
        self.actions.len()
    }

    fn legal_mask(&self) -> Vec<bool> {
        self.actions.iter().map(|a| a.is_legal(&self.state)).collect()
    }

    fn legal_mask_for(&self, observation: &[f64]) -> Vec<bool> {
        let moments = CircuitTensorState::moments_from_observation(
            self.config.n_qubits,
            self.config.l_max,
            observation,
        );
        let n = self.config.n_qubits;
        self.actions
            .iter()
            .map(|a| {
                let (two, rot) = a.footprint(n);
                let mut m = moments.clone();
                for (c, t) in two {
                    let l = m[c].max(m[t]);
                    if l >= self.config.l_max {
                        return false;
                    }
                    m[c] = l + 1;
                    m[t] = l + 1;
                }
                rot.map_or(true, |q| m[q] < self.config.l_max)
            })
            .collect()
    }

    fn needs_bootstrap_mask(&self) -> bool {
        true
    }

    fn env_id(&self) -> String {
        format!(
            "qas/{}q/enc{}/{}terms",
            self.config.n_qubits,
            match self.config.encoding {
                EncodingKind::I => "I",
                EncodingKind::II => "II",
            },
            self.config.hamiltonian.terms().len()
        )
    }
}

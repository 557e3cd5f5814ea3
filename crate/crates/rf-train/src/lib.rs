//! The environment contract and the seeded single-run training loop shared by
//! the compiling, architecture-search and diagnostic experiments. One run owns
//! one environment, one agent, one replay buffer and one RNG stream.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rf_agent::{
    compute_target, select_action, train_step, AdamState, AgentConfig, EpsilonSchedule,
    NStepAccumulator, QNetwork, TargetSync, TrainBatch,
};
use rf_replay::{her_relabel, Episode, ReplayBuffer, Transition};

/// Gate tally of the circuit behind a reported metric.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolutionStats {
    pub total_gates: u32,
    pub cnot: u32,
    pub rot: u32,
}

/// What one environment step produced.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub observation: Vec<f64>,
    pub reward: f64,
    pub done: bool,
    /// Task-level success (threshold reached), reported on the terminal step.
    pub success: bool,
    /// Whether this step triggered an expensive evaluation (architecture search).
    pub eval_performed: bool,
    /// Task metric when available: final fidelity for compiling, energy error
    /// at evaluation steps for architecture search.
    pub metric: Option<f64>,
    pub stats: Option<SolutionStats>,
}

/// The reset/step contract all experiments run against.
pub trait Environment {
    fn reset(&mut self, rng: &mut ChaCha8Rng) -> Vec<f64>;
    fn step(&mut self, action: usize, rng: &mut ChaCha8Rng) -> StepOutcome;
    fn observation_dim(&self) -> usize;
    fn action_count(&self) -> usize;
    /// Legality mask for the current state.
    fn legal_mask(&self) -> Vec<bool>;
    /// Legality mask reconstructed from an observation, used to restrict the
    /// bootstrap maximization. Environments without action constraints keep
    /// the permissive default.
    fn legal_mask_for(&self, _observation: &[f64]) -> Vec<bool> {
        vec![true; self.action_count()]
    }
    /// Whether bootstrap targets must respect [`Environment::legal_mask_for`].
    fn needs_bootstrap_mask(&self) -> bool {
        false
    }
    /// Identifier recorded in buffer files; loading guards check it.
    fn env_id(&self) -> String;
    /// Lower metric is better (energy error); compiling reports fidelity and
    /// overrides this.
    fn metric_lower_is_better(&self) -> bool {
        true
    }
    /// Hindsight relabeler for goal-conditioned environments.
    fn her_relabeler(&self) -> Option<&dyn rf_replay::HerRelabeler> {
        None
    }
    /// Goal vector to attach to transitions (goal-conditioned environments).
    fn current_goal(&self) -> Option<Vec<f32>> {
        None
    }
}

/// One per-episode metrics row; the CSV schema of every run directory.
#[derive(Debug, Clone)]
pub struct MetricsRecord {
    pub run_id: String,
    pub episode: u64,
    /// Global environment step count at episode end.
    pub step: u64,
    pub ret: f64,
    pub loss: f64,
    pub epsilon: f64,
    pub omega_now: f64,
    pub success: bool,
    pub task_metric: f64,
    pub wall_ms: f64,
}

impl MetricsRecord {
    pub const CSV_HEADER: &'static str =
        "run_id,episode,step,return,loss,epsilon,omega_now,success,task_metric,wall_ms";

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.run_id,
            self.episode,
            self.step,
            self.ret,
            self.loss,
            self.epsilon,
            self.omega_now,
            u8::from(self.success),
            self.task_metric,
            self.wall_ms
        )
    }
}

/// Append-only per-episode CSV writer, flushed after every row so a killed
/// run loses at most the episode in flight.
pub struct MetricsWriter {
    file: std::fs::File,
}

impl MetricsWriter {
    pub fn create(path: &Path) -> std::io::Result<Self> {
        let mut file = std::fs::File::create(path)?;
        writeln!(file, "{}", MetricsRecord::CSV_HEADER)?;
        file.flush()?;
        Ok(Self { file })
    }

    pub fn append(&mut self, record: &MetricsRecord) -> std::io::Result<()> {
        writeln!(self.file, "{}", record.to_csv_row())?;
        self.file.flush()
    }
}

/// A point where the best-so-far task metric improved.
#[derive(Debug, Clone, Copy)]
pub struct ImprovementPoint {
    pub step: u64,
    pub best_metric: f64,
    pub stats: SolutionStats,
}

/// Everything a finished run hands back to the caller.
pub struct TrainResult {
    pub metrics: Vec<MetricsRecord>,
    pub online: QNetwork,
    pub buffer: ReplayBuffer,
    pub improvements: Vec<ImprovementPoint>,
    pub total_steps: u64,
    pub total_evals: u64,
    pub episodes_run: u64,
    pub successes: u64,
}

pub struct TrainParams {
    pub episodes: u64,
    pub seed: u64,
    pub run_id: String,
}

/// Derived RNG stream so paired runs share network initialization when they
/// share a seed, independent of how many draws the environment makes.
pub fn net_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15)
}

pub fn run_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Train one agent on one environment with one replay buffer.
///
/// `buffer` may arrive pre-populated (warm start); it is consumed and
/// returned inside [`TrainResult`]. `on_episode` fires after every episode
/// with the freshly written metrics row.
pub fn train_run(
    env: &mut dyn Environment,
    agent_cfg: &AgentConfig,
    mut buffer: ReplayBuffer,
    params: &TrainParams,
    mut on_episode: Option<&mut dyn FnMut(&MetricsRecord)>,
) -> Result<TrainResult, TrainError> {
    agent_cfg.validate();
    let mut rng = run_rng(params.seed);
    let mut net_init_rng = net_rng(params.seed);

    let mut layer_sizes = vec![env.observation_dim()];
    layer_sizes.extend_from_slice(&agent_cfg.hidden);
    layer_sizes.push(env.action_count());
    let mut online = QNetwork::new(layer_sizes, agent_cfg.activation, &mut net_init_rng);
    let mut target = online.clone();
    let mut adam = AdamState::new(online.param_count(), agent_cfg.lr);
    let mut eps = EpsilonSchedule::new(agent_cfg.eps_start, agent_cfg.eps_min, agent_cfg.eps_decay);
    let gamma_eff = agent_cfg.gamma_effective();
    let warmup = agent_cfg.warmup.max(agent_cfg.batch_size);
    let lower_better = env.metric_lower_is_better();

    let mut metrics = Vec::with_capacity(params.episodes as usize);
    let mut improvements: Vec<ImprovementPoint> = Vec::new();
    let mut best_metric = if lower_better { f64::INFINITY } else { f64::NEG_INFINITY };
    let mut episode_counter: u32 = 0;
    let mut global_step: u64 = 0;
    let mut total_evals: u64 = 0;
    let mut successes: u64 = 0;
    let mut steps_since_sync: u64 = 0;

    for episode_idx in 0..params.episodes {
        let episode_start = Instant::now();
        let episode_id = episode_counter;
        episode_counter = episode_counter.wrapping_add(1);
        let mut obs = env.reset(&mut rng);
        let mut acc = NStepAccumulator::new(agent_cfg.n_step, agent_cfg.gamma);
        let mut episode_transitions: Vec<Transition> = Vec::new();
        let mut ret = 0.0;
        let mut loss_sum = 0.0;
        let mut loss_count = 0u64;
        let mut step_in_episode: u32 = 0;
        let mut last_metric = f64::NAN;

        let success = loop {
            let mask = env.legal_mask();
            let action = select_action(&online, &obs, eps.current(), &mask, &mut rng)?;
            let out = env.step(action, &mut rng);
            global_step += 1;
            steps_since_sync += 1;
            step_in_episode += 1;
            ret += out.reward;
            if out.eval_performed {
                total_evals += 1;
            }
            if let Some(m) = out.metric {
                last_metric = m;
                let improved = if lower_better { m < best_metric } else { m > best_metric };
                if improved {
                    best_metric = m;
                    improvements.push(ImprovementPoint {
                        step: global_step,
                        best_metric: m,
                        stats: out.stats.unwrap_or_default(),
                    });
                }
            }

            let mut raw = Transition::new(
                obs.iter().map(|&v| v as f32).collect(),
                action as u32,
                out.reward as f32,
                out.observation.iter().map(|&v| v as f32).collect(),
                out.done,
                episode_id,
                step_in_episode,
            );
            raw.goal = env.current_goal();
            for collapsed in acc.push(raw)? {
                episode_transitions.push(collapsed.clone());
                buffer.insert(collapsed);
            }

            if agent_cfg.eps_decay_per_step {
                eps.decay();
            }

            if buffer.len() >= warmup && global_step % agent_cfg.learn_every == 0 {
                let loss = learner_update(
                    env,
                    &mut buffer,
                    &mut online,
                    &target,
                    &mut adam,
                    agent_cfg,
                    gamma_eff,
                    &mut rng,
                )?;
                loss_sum += loss;
                loss_count += 1;
            }

            if let TargetSync::EverySteps(k) = agent_cfg.target_sync {
                if steps_since_sync >= k {
                    target.sync_from(&online);
                    steps_since_sync = 0;
                }
            }

            obs = out.observation;
            if out.done {
                break out.success;
            }
        };

        if success {
            successes += 1;
        }
        if !agent_cfg.eps_decay_per_step {
            eps.decay();
        }
        if let TargetSync::EveryEpisodes(k) = agent_cfg.target_sync {
            if (episode_idx + 1) % k == 0 {
                target.sync_from(&online);
            }
        }

        // episode-end bookkeeping: fresh TD magnitudes feed the reliability scores
        if !episode_transitions.is_empty() {
            let mut episode = Episode::new(episode_transitions);
            episode.td_plus =
                episode_td_magnitudes(env, &episode, &online, &target, gamma_eff, agent_cfg)?;
            buffer.on_episode_end(&episode)?;
            if let Some(relabeler) = env.her_relabeler() {
                let copies = her_relabel(&episode, 5, relabeler, &mut rng, &mut episode_counter)?;
                for c in copies {
                    buffer.insert(c);
                }
            }
        }

        let record = MetricsRecord {
            run_id: params.run_id.clone(),
            episode: episode_idx,
            step: global_step,
            ret,
            loss: if loss_count > 0 { loss_sum / loss_count as f64 } else { 0.0 },
            epsilon: eps.current(),
            omega_now: buffer.omega_now(),
            success,
            task_metric: last_metric,
            wall_ms: episode_start.elapsed().as_secs_f64() * 1e3,
        };
        if let Some(cb) = on_episode.as_deref_mut() {
            cb(&record);
        }
        metrics.push(record);
    }

    Ok(TrainResult {
        metrics,
        online,
        buffer,
        improvements,
        total_steps: global_step,
        total_evals,
        episodes_run: params.episodes,
        successes,
    })
}

#[allow(clippy::too_many_arguments)]
fn learner_update(
    env: &dyn Environment,
    buffer: &mut ReplayBuffer,
    online: &mut QNetwork,
    target: &QNetwork,
    adam: &mut AdamState,
    cfg: &AgentConfig,
    gamma_eff: f64,
    rng: &mut ChaCha8Rng,
) -> Result<f64, TrainError> {
    let batch = buffer.sample(cfg.batch_size, rng)?;
    let n = batch.indices.len();
    let mut states: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut next_states: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut actions = Vec::with_capacity(n);
    let mut rewards = Vec::with_capacity(n);
    let mut dones = Vec::with_capacity(n);
    for &slot in &batch.indices {
        let t = buffer.get(slot);
        states.push(t.state.iter().map(|&v| v as f64).collect());
        next_states.push(t.next_state.iter().map(|&v| v as f64).collect());
        actions.push(t.action as usize);
        rewards.push(t.reward as f64);
        dones.push(t.done);
    }
    let next_refs: Vec<&[f64]> = next_states.iter().map(|s| s.as_slice()).collect();
    let masks: Option<Vec<Vec<bool>>> = env
        .needs_bootstrap_mask()
        .then(|| next_states.iter().map(|s| env.legal_mask_for(s)).collect());
    let targets = compute_target(
        &rewards,
        &dones,
        &next_refs,
        masks.as_deref(),
        online,
        target,
        gamma_eff,
        cfg.double_q,
    )?;
    let state_refs: Vec<&[f64]> = states.iter().map(|s| s.as_slice()).collect();
    let train_batch =
        TrainBatch { states: state_refs, actions, targets, is_weights: batch.is_weights.clone() };
    let (loss, td_abs) = train_step(online, &train_batch, cfg.loss, cfg.grad_clip, adam)?;
    buffer.update_td(&batch.indices, &td_abs)?;
    Ok(loss)
}

/// `|Y - Q|` for every transition of a finished episode under the current
/// networks; feeds the reliability scores.
fn episode_td_magnitudes(
    env: &dyn Environment,
    episode: &Episode,
    online: &QNetwork,
    target: &QNetwork,
    gamma_eff: f64,
    cfg: &AgentConfig,
) -> Result<Vec<f64>, TrainError> {
    let mut out = Vec::with_capacity(episode.len());
    for t in &episode.transitions {
        let state: Vec<f64> = t.state.iter().map(|&v| v as f64).collect();
        let next: Vec<f64> = t.next_state.iter().map(|&v| v as f64).collect();
        let mask = env.needs_bootstrap_mask().then(|| vec![env.legal_mask_for(&next)]);
        let y = compute_target(
            &[t.reward as f64],
            &[t.done],
            &[next.as_slice()],
            mask.as_deref(),
            online,
            target,
            gamma_eff,
            cfg.double_q,
        )?[0];
        let q = online.forward(&state)?[t.action as usize];
        out.push((y - q).abs());
    }
    Ok(out)
}

#[derive(Debug, thiserror::Error)]
pub enum TrainError {
    #[error(transparent)]
    Agent(#[from] rf_agent::AgentError),
    #[error(transparent)]
    Replay(#[from] rf_replay::ReplayError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// First global step at which the best-so-far metric crossed `threshold`
/// (lower-is-better); `None` if it never did.
pub fn steps_to_threshold(improvements: &[ImprovementPoint], threshold: f64) -> Option<u64> {
    improvements.iter().find(|p| p.best_metric <= threshold).map(|p| p.step)
}

//! Noiseless-to-noisy transfer protocol: capture a source replay buffer on
//! the noiseless task, warm-start the noisy target buffer with it, train
//! target and from-scratch baseline under paired seeds, and score the
//! transfer with the weighted multi-objective improvement.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use rf_agent::AgentConfig;
use rf_env_qas::{QasConfig, QasEnv};
use rf_qcore::NoiseModel;
use rf_replay::{OmegaSchedule, PrioritySpec, ReplayBuffer, Strategy};
use rf_train::{train_run, Environment, TrainError, TrainParams, TrainResult};

/// Relative improvements over the no-transfer baseline, in percent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferDeltas {
    pub steps: f64,
    pub rot: f64,
    pub cnot: f64,
    pub err: f64,
}

impl TransferDeltas {
    pub const ZERO: TransferDeltas = TransferDeltas { steps: 0.0, rot: 0.0, cnot: 0.0, err: 0.0 };
}

/// `S = w1 d_steps + w2 d_rot + w3 d_cnot + w4 d_err`, exactly.
pub fn weighted_score(deltas: &TransferDeltas, weights: &[f64; 4]) -> f64 {
    weights[0] * deltas.steps + weights[1] * deltas.rot + weights[2] * deltas.cnot + weights[3] * deltas.err
}

/// Shipped default weights (steps, rot, cnot, err).
pub const DEFAULT_WEIGHTS: [f64; 4] = [0.4, 0.1, 0.2, 0.3];

/// Energy-error threshold regarded as "solved" for molecular tasks, in the
/// Hamiltonian's energy units.
pub const CHEMICAL_ACCURACY: f64 = 1.6e-3;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NoiseSection {
    pub p1: f64,
    pub p2: f64,
}

/// One arm's aggregate outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmSummary {
    /// Median steps to the error threshold over seeds (censored at each
    /// run's budget when never reached).
    pub median_steps_to_threshold: f64,
    pub runs_reaching_threshold: usize,
    pub mean_best_err: f64,
    pub mean_rot: f64,
    pub mean_cnot: f64,
    pub mean_total_steps: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransferReport {
    pub source_buffer_file: Option<String>,
    pub target_env: String,
    pub noise: NoiseSection,
    pub deltas: TransferDeltas,
    /// Deltas recomputed at the matched per-seed step budget
    /// `min(steps_transfer, steps_baseline)`.
    pub deltas_matched: TransferDeltas,
    pub weights: [f64; 4],
    pub score: f64,
    pub score_matched: f64,
    pub seeds: Vec<u64>,
    pub threshold: f64,
    pub transfer: ArmSummary,
    pub baseline: ArmSummary,
    pub per_seed: Vec<SeedOutcome>,
    pub runtimes_ms: RuntimesMs,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SeedOutcome {
    pub seed: u64,
    pub transfer_steps_to_threshold: Option<u64>,
    pub baseline_steps_to_threshold: Option<u64>,
    pub transfer_best_err: f64,
    pub baseline_best_err: f64,
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct RuntimesMs {
    pub source: f64,
    pub transfer: f64,
    pub baseline: f64,
}

/// Replay settings of all three arms.
#[derive(Debug, Clone)]
pub struct ReplaySettings {
    pub strategy: Strategy,
    pub capacity: usize,
    pub spec: PrioritySpec,
    pub schedule: Option<OmegaSchedule>,
}

/// Where the source experience comes from.
pub enum SourceSpec {
    /// Train a fresh source agent on the noiseless task, per seed.
    TrainFresh { episodes: u64 },
    /// Reuse one pre-recorded buffer for every seed.
    LoadedBuffer { buffer: ReplayBuffer, file: PathBuf },
}

pub struct TransferRunConfig {
    /// The task; `noise` inside is ignored (set per arm).
    pub qas: QasConfig,
    pub agent: AgentConfig,
    pub replay: ReplaySettings,
    pub noise: NoiseModel,
    pub target_episodes: u64,
    /// Reduced initial exploration of the warm-started arm.
    pub target_eps_start: f64,
    /// Error threshold for steps-to-threshold.
    pub threshold: f64,
    pub seeds: Vec<u64>,
    pub weights: [f64; 4],
    /// Keep the source priorities instead of the uniform max reset.
    pub keep_source_priorities: bool,
}

fn fresh_buffer(settings: &ReplaySettings, env: &QasEnv) -> ReplayBuffer {
    ReplayBuffer::new(
        settings.strategy,
        settings.capacity,
        env.observation_dim(),
        env.action_count(),
        env.env_id(),
        settings.spec,
        settings.schedule,
    )
}

struct ArmOutcome {
    steps_to_threshold: Option<u64>,
    best_err: f64,
    rot_at_best: u32,
    cnot_at_best: u32,
    total_steps: u64,
    improvements: Vec<rf_train::ImprovementPoint>,
}

fn summarize(result: &TrainResult, threshold: f64) -> ArmOutcome {
    let best = result.improvements.last();
    ArmOutcome {
        steps_to_threshold: rf_train::steps_to_threshold(&result.improvements, threshold),
        best_err: best.map_or(f64::INFINITY, |p| p.best_metric),
        rot_at_best: best.map_or(0, |p| p.stats.rot),
        cnot_at_best: best.map_or(0, |p| p.stats.cnot),
        total_steps: result.total_steps,
        improvements: result.improvements.clone(),
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn arm_summary(outcomes: &[ArmOutcome]) -> ArmSummary {
    let n = outcomes.len() as f64;
    let mut censored: Vec<f64> = outcomes
        .iter()
        .map(|o| o.steps_to_threshold.unwrap_or(o.total_steps) as f64)
        .collect();
    ArmSummary {
        median_steps_to_threshold: median(&mut censored),
        runs_reaching_threshold: outcomes.iter().filter(|o| o.steps_to_threshold.is_some()).count(),
        mean_best_err: outcomes.iter().map(|o| o.best_err).sum::<f64>() / n,
        mean_rot: outcomes.iter().map(|o| o.rot_at_best as f64).sum::<f64>() / n,
        mean_cnot: outcomes.iter().map(|o| o.cnot_at_best as f64).sum::<f64>() / n,
        mean_total_steps: outcomes.iter().map(|o| o.total_steps as f64).sum::<f64>() / n,
    }
}

fn relative_improvement(baseline: f64, transfer: f64) -> f64 {
    if baseline == 0.0 || !baseline.is_finite() || !transfer.is_finite() {
        0.0
    } else {
        (baseline - transfer) / baseline * 100.0
    }
}

fn deltas_between(transfer: &ArmSummary, baseline: &ArmSummary) -> TransferDeltas {
    TransferDeltas {
        steps: relative_improvement(
            baseline.median_steps_to_threshold,
            transfer.median_steps_to_threshold,
        ),
        rot: relative_improvement(baseline.mean_rot, transfer.mean_rot),
        cnot: relative_improvement(baseline.mean_cnot, transfer.mean_cnot),
        err: relative_improvement(baseline.mean_best_err, transfer.mean_best_err),
    }
}

/// Best-so-far view of an arm truncated to a step budget.
fn outcome_at_budget(outcome: &ArmOutcome, budget: u64, threshold: f64) -> ArmOutcome {
    let improvements: Vec<_> =
        outcome.improvements.iter().copied().filter(|p| p.step <= budget).collect();
    let best = improvements.last();
    ArmOutcome {
        steps_to_threshold: rf_train::steps_to_threshold(&improvements, threshold),
        best_err: best.map_or(f64::INFINITY, |p| p.best_metric),
        rot_at_best: best.map_or(0, |p| p.stats.rot),
        cnot_at_best: best.map_or(0, |p| p.stats.cnot),
        total_steps: budget,
        improvements,
    }
}

/// Run the full protocol: per seed, train (or load) the noiseless source,
/// warm-start the noisy target with the transferred buffer at reduced
/// exploration, train the from-scratch baseline under the same seed, then
/// aggregate deltas and the weighted score.
pub fn run_transfer(cfg: &TransferRunConfig, source: &SourceSpec) -> Result<TransferReport, TrainError> {
    assert!(!cfg.seeds.is_empty(), "at least one seed");
    let mut noiseless_cfg = cfg.qas.clone();
    noiseless_cfg.noise = None;
    let mut noisy_cfg = cfg.qas.clone();
    noisy_cfg.noise = Some(cfg.noise);

    let mut transfer_outcomes = Vec::new();
    let mut baseline_outcomes = Vec::new();
    let mut per_seed = Vec::new();
    let mut runtimes = RuntimesMs::default();

    for &seed in &cfg.seeds {
        // source buffer for this seed
        let t0 = std::time::Instant::now();
        let source_buffer = match source {
            SourceSpec::LoadedBuffer { buffer, .. } => buffer.clone(),
            SourceSpec::TrainFresh { episodes } => {
                let mut env = QasEnv::new(noiseless_cfg.clone()).map_err(into_train_err)?;
                let buffer = fresh_buffer(&cfg.replay, &env);
                let result = train_run(
                    &mut env,
                    &cfg.agent,
                    buffer,
                    &TrainParams { episodes: *episodes, seed, run_id: format!("source-{seed}") },
                    None,
                )?;
                result.buffer
            }
        };
        runtimes.source += t0.elapsed().as_secs_f64() * 1e3;

        // the transferred buffer must match the target spaces before training
        let mut target_env = QasEnv::new(noisy_cfg.clone()).map_err(into_train_err)?;
        if source_buffer.state_dim() != target_env.observation_dim() {
            return Err(TrainError::Replay(rf_replay::ReplayError::StateDimMismatch {
                file: source_buffer.state_dim() as u32,
                expected: target_env.observation_dim() as u32,
            }));
        }
        if source_buffer.action_count() != target_env.action_count() {
            return Err(TrainError::Replay(rf_replay::ReplayError::ActionCountMismatch {
                file: source_buffer.action_count() as u32,
                expected: target_env.action_count() as u32,
            }));
        }

        let t1 = std::time::Instant::now();
        let warm = source_buffer.transfer_with(cfg.keep_source_priorities);
        let mut transfer_agent = cfg.agent.clone();
        transfer_agent.eps_start = cfg.target_eps_start;
        let transfer_result = train_run(
            &mut target_env,
            &transfer_agent,
            warm,
            &TrainParams { episodes: cfg.target_episodes, seed, run_id: format!("transfer-{seed}") },
            None,
        )?;
        runtimes.transfer += t1.elapsed().as_secs_f64() * 1e3;

        let t2 = std::time::Instant::now();
        let mut baseline_env = QasEnv::new(noisy_cfg.clone()).map_err(into_train_err)?;
        let baseline_buffer = fresh_buffer(&cfg.replay, &baseline_env);
        let baseline_result = train_run(
            &mut baseline_env,
            &cfg.agent,
            baseline_buffer,
            &TrainParams { episodes: cfg.target_episodes, seed, run_id: format!("baseline-{seed}") },
            None,
        )?;
        runtimes.baseline += t2.elapsed().as_secs_f64() * 1e3;

        let t_out = summarize(&transfer_result, cfg.threshold);
        let b_out = summarize(&baseline_result, cfg.threshold);
        per_seed.push(SeedOutcome {
            seed,
            transfer_steps_to_threshold: t_out.steps_to_threshold,
            baseline_steps_to_threshold: b_out.steps_to_threshold,
            transfer_best_err: t_out.best_err,
            baseline_best_err: b_out.best_err,
        });
        transfer_outcomes.push(t_out);
        baseline_outcomes.push(b_out);
    }

    let transfer_summary = arm_summary(&transfer_outcomes);
    let baseline_summary = arm_summary(&baseline_outcomes);
    let deltas = deltas_between(&transfer_summary, &baseline_summary);

    // matched budget: truncate each seed pair to its common step budget
    let matched_t: Vec<ArmOutcome> = transfer_outcomes
        .iter()
        .zip(&baseline_outcomes)
        .map(|(t, b)| outcome_at_budget(t, t.total_steps.min(b.total_steps), cfg.threshold))
        .collect();
    let matched_b: Vec<ArmOutcome> = transfer_outcomes
        .iter()
        .zip(&baseline_outcomes)
        .map(|(t, b)| outcome_at_budget(b, t.total_steps.min(b.total_steps), cfg.threshold))
        .collect();
    let deltas_matched = deltas_between(&arm_summary(&matched_t), &arm_summary(&matched_b));

    let target_env_id = QasEnv::new(noisy_cfg.clone()).map_err(into_train_err)?.env_id();
    Ok(TransferReport {
        source_buffer_file: match source {
            SourceSpec::LoadedBuffer { file, .. } => Some(file.display().to_string()),
            SourceSpec::TrainFresh { .. } => None,
        },
        target_env: target_env_id,
        noise: NoiseSection { p1: cfg.noise.p1, p2: cfg.noise.p2 },
        score: weighted_score(&deltas, &cfg.weights),
        score_matched: weighted_score(&deltas_matched, &cfg.weights),
        deltas,
        deltas_matched,
        weights: cfg.weights,
        seeds: cfg.seeds.clone(),
        threshold: cfg.threshold,
        transfer: transfer_summary,
        baseline: baseline_summary,
        per_seed,
        runtimes_ms: runtimes,
    })
}

fn into_train_err(e: rf_env_qas::QasError) -> TrainError {
    TrainError::Io(std::io::Error::other(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weighted_score_is_the_exact_dot_product() {
        let deltas = TransferDeltas { steps: 50.0, rot: 10.0, cnot: 20.0, err: 30.0 };
        let s = weighted_score(&deltas, &DEFAULT_WEIGHTS);
        assert!((s - 34.0).abs() < 1e-12, "0.4*50 + 0.1*10 + 0.2*20 + 0.3*30 = 34, got {s}");
        assert_eq!(weighted_score(&TransferDeltas::ZERO, &DEFAULT_WEIGHTS), 0.0);
    }

    #[test]
    fn score_is_linear_in_deltas() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            let d = TransferDeltas {
                steps: rng.gen_range(-50.0..90.0),
                rot: rng.gen_range(-50.0..90.0),
                cnot: rng.gen_range(-50.0..90.0),
                err: rng.gen_range(-50.0..90.0),
            };
            let lambda: f64 = rng.gen_range(-3.0..3.0);
            let scaled = TransferDeltas {
                steps: lambda * d.steps,
                rot: lambda * d.rot,
                cnot: lambda * d.cnot,
                err: lambda * d.err,
            };
            let a = lambda * weighted_score(&d, &DEFAULT_WEIGHTS);
            let b = weighted_score(&scaled, &DEFAULT_WEIGHTS);
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn median_of_odd_and_even() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn relative_improvement_guards_zero_baseline() {
        assert_eq!(relative_improvement(0.0, 5.0), 0.0);
        assert!((relative_improvement(10.0, 5.0) - 50.0).abs() < 1e-12);
        assert!((relative_improvement(10.0, 14.0) + 40.0).abs() < 1e-12);
    }
}

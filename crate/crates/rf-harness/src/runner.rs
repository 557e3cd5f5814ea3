use std::io::Write;
use std::path::{Path, PathBuf};

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rf_agent::{select_action, Activation, AgentConfig, LossKind, QNetwork, TargetSync};
use rf_env_compile::{CompileConfig, CompileEnv, Gateset, RewardMode, TargetSource};
use rf_env_qas::{EncodingKind, QasConfig, QasEnv, VqeMethod, VqeOptimizerConfig};
use rf_qcore::{
    exact_ground_energy, heisenberg_hamiltonian, FidelityKind, NoiseModel, PauliSumHamiltonian,
};
use rf_replay::{OmegaSchedule, PrioritySpec, ReplayBuffer, Strategy};
use rf_train::{train_run, Environment, MetricsWriter, TrainParams, TrainResult};

use crate::chain::{ChainConfig, ChainMdp};
use crate::config::{ExperimentConfig, ExperimentKind};
use crate::HarnessError;

/// A constructed environment of any experiment kind.
pub enum AnyEnv {
    Compile(CompileEnv),
    Qas(QasEnv),
    Chain(ChainMdp),
}

impl AnyEnv {
    pub fn as_env_mut(&mut self) -> &mut dyn Environment {
        match self {
            AnyEnv::Compile(e) => e,
            AnyEnv::Qas(e) => e,
            AnyEnv::Chain(e) => e,
        }
    }

    pub fn as_env(&self) -> &dyn Environment {
        match self {
            AnyEnv::Compile(e) => e,
            AnyEnv::Qas(e) => e,
            AnyEnv::Chain(e) => e,
        }
    }

    pub fn qas(&self) -> Option<&QasEnv> {
        match self {
            AnyEnv::Qas(e) => Some(e),
            _ => None,
        }
    }

    pub fn compile(&self) -> Option<&CompileEnv> {
        match self {
            AnyEnv::Compile(e) => Some(e),
            _ => None,
        }
    }
}

pub fn build_agent_config(cfg: &ExperimentConfig) -> Result<AgentConfig, HarnessError> {
    let a = &cfg.agent;
    let activation = match a.activation.as_str() {
        "relu" => Activation::Relu,
        "selu" => Activation::Selu,
        other => return Err(HarnessError::config(format!("unknown activation '{other}'"))),
    };
    let target_sync = match a.target_sync.as_str() {
        "episodes" => TargetSync::EveryEpisodes(a.target_sync_every),
        "steps" => TargetSync::EverySteps(a.target_sync_every),
        other => return Err(HarnessError::config(format!("unknown target_sync '{other}'"))),
    };
    let loss = match a.loss.as_str() {
        "huber" => LossKind::Huber,
        "squared" => LossKind::Squared,
        other => return Err(HarnessError::config(format!("unknown loss '{other}'"))),
    };
    let eps_decay_per_step = match a.eps_decay_per.as_str() {
        "step" => true,
        "episode" => false,
        other => return Err(HarnessError::config(format!("unknown eps_decay_per '{other}'"))),
    };
    Ok(AgentConfig {
        gamma: a.gamma,
        lr: a.lr,
        batch_size: a.batch_size,
        hidden: a.hidden.clone(),
        activation,
        target_sync,
        grad_clip: a.grad_clip,
        eps_start: a.eps_start,
        eps_min: a.eps_min,
        eps_decay: a.eps_decay,
        eps_decay_per_step,
        n_step: a.n_step,
        double_q: a.double_q,
        loss,
        warmup: a.warmup,
        learn_every: a.learn_every,
    })
}

pub struct ReplayPlan {
    pub strategy: Strategy,
    pub capacity: usize,
    pub spec: PrioritySpec,
    pub schedule: Option<OmegaSchedule>,
}

pub fn build_replay_plan(cfg: &ExperimentConfig) -> Result<ReplayPlan, HarnessError> {
    let r = &cfg.replay;
    let strategy = Strategy::parse(&r.strategy)
        .ok_or_else(|| HarnessError::config(format!("unknown strategy '{}'", r.strategy)))?;
    Ok(ReplayPlan {
        strategy,
        capacity: r.capacity,
        spec: PrioritySpec {
            alpha: r.alpha,
            omega: r.omega,
            beta0: r.beta0,
            beta_anneal_frames: r.beta_anneal_frames,
            epsilon_priority: r.epsilon_priority,
        },
        schedule: Some(OmegaSchedule {
            omega_min: r.omega_min,
            omega_max: r.omega_max,
            t_ann: r.t_ann,
        }),
    })
}

pub fn make_buffer(plan: &ReplayPlan, env: &dyn Environment) -> ReplayBuffer {
    ReplayBuffer::new(
        plan.strategy,
        plan.capacity,
        env.observation_dim(),
        env.action_count(),
        env.env_id(),
        plan.spec,
        plan.schedule,
    )
}

pub fn build_compile_config(cfg: &ExperimentConfig) -> Result<CompileConfig, HarnessError> {
    let e = &cfg.env;
    let gateset = match e.gateset.as_deref() {
        Some("small_rotations_1q") | None => Gateset::SmallRotations1Q,
        Some("hrc_1q") => Gateset::Hrc1Q,
        Some("two_qubit") => Gateset::TwoQubit,
        Some(other) => return Err(HarnessError::config(format!("unknown gateset '{other}'"))),
    };
    let mut compile = CompileConfig::new(gateset);
    if let Some(t) = e.tolerance {
        compile.tolerance = t;
    }
    if let Some(l) = e.max_len {
        compile.max_len = l;
    }
    compile.reward_mode = match e.reward_mode.as_deref() {
        Some("dense") => RewardMode::Dense,
        Some("sparse") => RewardMode::Sparse,
        None => compile.reward_mode,
        Some(other) => return Err(HarnessError::config(format!("unknown reward_mode '{other}'"))),
    };
    compile.target_source = match e.target_source.as_deref() {
        Some("haar") => TargetSource::Haar1Q,
        Some("random_circuit") => TargetSource::RandomCircuit {
            min_gates: e.target_min_gates.unwrap_or(1),
            max_gates: e.target_max_gates.unwrap_or(20),
        },
        Some("zz_pi") => TargetSource::Fixed(rf_env_compile::zz_pi_target()),
        None => compile.target_source,
        Some(other) => return Err(HarnessError::config(format!("unknown target_source '{other}'"))),
    };
    if e.fidelity_squared == Some(true) {
        compile.fidelity_kind = FidelityKind::TraceSquared;
    }
    compile.her_goals = cfg.replay.strategy == "her";
    Ok(compile)
}

pub fn load_hamiltonian(e: &crate::config::EnvSection) -> Result<PauliSumHamiltonian, HarnessError> {
    let n = e.n_qubits.unwrap_or(3);
    match e.hamiltonian.as_deref() {
        Some("heisenberg") | None => Ok(heisenberg_hamiltonian(n)?),
        Some(path) => {
            let h = PauliSumHamiltonian::load(Path::new(path))
                .map_err(|err| HarnessError::io(format!("{path}: {err}")))?;
            Ok(h)
        }
    }
}

pub fn build_qas_config(cfg: &ExperimentConfig, noise_override: Option<NoiseModel>) -> Result<QasConfig, HarnessError> {
    let e = &cfg.env;
    let hamiltonian = load_hamiltonian(e)?;
    let encoding = match e.encoding.as_deref() {
        Some("I") | None => EncodingKind::I,
        Some("II") => EncodingKind::II,
        Some(other) => return Err(HarnessError::config(format!("unknown encoding '{other}'"))),
    };
    let l_max = e.l_max.unwrap_or(8);
    let mut qas = QasConfig::new(hamiltonian, encoding, l_max);
    qas.m = e.m.unwrap_or(10);
    qas.t_s = e.t_s.unwrap_or(l_max as u32 * 2);
    qas.trajectories = e.trajectories.unwrap_or(256);
    qas.optimizer = VqeOptimizerConfig {
        method: match e.vqe_method.as_deref() {
            Some("nelder_mead") | None => VqeMethod::NelderMead,
            Some("param_shift_adam") => VqeMethod::ParamShiftAdam,
            Some(other) => return Err(HarnessError::config(format!("unknown vqe_method '{other}'"))),
        },
        max_iter: e.vqe_max_iter.unwrap_or(1000),
        warm_start: true,
    };
    if let Some(v) = e.accept_error_init {
        qas.curriculum.accept_error_init = v;
    }
    if let Some(v) = e.shift_ball {
        qas.curriculum.shift_ball = v;
    }
    if let Some(v) = e.shift_time {
        qas.curriculum.shift_time = v;
    }
    if let Some(v) = e.success_switch {
        qas.curriculum.success_switch = v;
    }
    if let Some(v) = e.success_threshold {
        qas.curriculum.success_threshold = v;
    }
    qas.noise = match noise_override {
        Some(n) => Some(n),
        None => {
            let (p1, p2) = (e.p1.unwrap_or(0.0), e.p2.unwrap_or(0.0));
            (p1 > 0.0 || p2 > 0.0).then_some(NoiseModel { p1, p2 })
        }
    };
    Ok(qas)
}

pub fn build_env(cfg: &ExperimentConfig, noise_override: Option<NoiseModel>) -> Result<AnyEnv, HarnessError> {
    match cfg.kind {
        ExperimentKind::Compile => Ok(AnyEnv::Compile(CompileEnv::new(build_compile_config(cfg)?))),
        ExperimentKind::Qas | ExperimentKind::Transfer => {
            Ok(AnyEnv::Qas(QasEnv::new(build_qas_config(cfg, noise_override)?)?))
        }
        ExperimentKind::Diag => Ok(AnyEnv::Chain(ChainMdp::new(ChainConfig {
            length: cfg.env.length.unwrap_or(6),
            slip: cfg.env.slip.unwrap_or(0.0),
            max_steps: cfg.env.max_steps.unwrap_or(48),
        }))),
    }
}

/// Outcome of one seed's run, with everything the caller may want to persist
/// or aggregate further.
pub struct SeedRun {
    pub seed: u64,
    pub run_dir: PathBuf,
    pub result: TrainResult,
}

/// Run `cfg` for every seed (each in its own thread, own RNG stream, own run
/// directory `output_dir/<seed>/`). Writes `metrics.csv`, `net.ckpt`,
/// `buffer.buf` and `config.snapshot`; architecture-search runs also write a
/// per-episode `qas.csv`.
pub fn run_train(
    cfg: &ExperimentConfig,
    buffer_in: Option<&Path>,
    buffer_out: Option<&Path>,
) -> Result<Vec<SeedRun>, HarnessError> {
    if buffer_out.is_some() && cfg.seeds.len() != 1 {
        return Err(HarnessError::config("--buffer-out requires exactly one seed"));
    }
    let root = PathBuf::from(&cfg.output_dir);
    std::fs::create_dir_all(&root)?;
    std::fs::write(root.join("config.snapshot"), cfg.to_toml())?;

    let warm_start = match buffer_in {
        None => None,
        Some(path) => {
            let plan = build_replay_plan(cfg)?;
            let mut file = std::fs::File::open(path)
                .map_err(|e| HarnessError::io(format!("{}: {e}", path.display())))?;
            let probe_env = build_env(cfg, None)?;
            let loaded = rf_replay::deserialize_for_env(
                &mut file,
                probe_env.as_env().observation_dim(),
                probe_env.as_env().action_count(),
                plan.spec,
                plan.schedule,
            )?;
            Some(loaded)
        }
    };

    let results: Vec<Result<SeedRun, HarnessError>> = std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for &seed in &cfg.seeds {
            let warm = warm_start.clone();
            let root = root.clone();
            handles.push(scope.spawn(move || run_one_seed(cfg, seed, &root, warm)));
        }
        handles.into_iter().map(|h| h.join().expect("seed worker panicked")).collect()
    });
    let mut runs = Vec::new();
    for r in results {
        runs.push(r?);
    }
    if let (Some(out), Some(run)) = (buffer_out, runs.first()) {
        let mut file = std::fs::File::create(out)?;
        rf_replay::serialize(&run.result.buffer, &mut file)?;
    }
    Ok(runs)
}

fn run_one_seed(
    cfg: &ExperimentConfig,
    seed: u64,
    root: &Path,
    warm_start: Option<ReplayBuffer>,
) -> Result<SeedRun, HarnessError> {
    let run_dir = root.join(seed.to_string());
    std::fs::create_dir_all(&run_dir)?;
    let agent_cfg = build_agent_config(cfg)?;
    let plan = build_replay_plan(cfg)?;
    let mut env = build_env(cfg, None)?;
    let buffer = match warm_start {
        // warm starts re-enter through the transfer op: payloads copied
        // unmodified, priorities reset to the running maximum, frame zeroed
        Some(src) => src.transfer_with(cfg.transfer.keep_source_priorities),
        None => make_buffer(&plan, env.as_env()),
    };
    let mut writer = MetricsWriter::create(&run_dir.join("metrics.csv"))?;
    let mut sink = |rec: &rf_train::MetricsRecord| {
        let _ = writer.append(rec);
    };
    let params = TrainParams { episodes: cfg.episodes, seed, run_id: format!("{}-{}", cfg.preset, seed) };
    let result = train_run(env.as_env_mut(), &agent_cfg, buffer, &params, Some(&mut sink))?;

    result.online.save(&run_dir.join("net.ckpt"))?;
    let mut file = std::fs::File::create(run_dir.join("buffer.buf"))?;
    rf_replay::serialize(&result.buffer, &mut file)?;
    std::fs::write(run_dir.join("config.snapshot"), cfg.to_toml())?;
    if let Some(qas) = env.qas() {
        write_qas_csv(&run_dir.join("qas.csv"), qas, &result)?;
    }
    Ok(SeedRun { seed, run_dir, result })
}

fn write_qas_csv(path: &Path, env: &QasEnv, result: &TrainResult) -> Result<(), HarnessError> {
    let mut f = std::fs::File::create(path)?;
    writeln!(
        f,
        "episode,steps,evals,best_cost,error_vs_exact,total_gates,cnot,rot,xi,epsilon,wall_ms"
    )?;
    for (i, log) in env.episode_log().iter().enumerate() {
        let (epsilon, wall) = result
            .metrics
            .get(i)
            .map(|m| (m.epsilon, m.wall_ms))
            .unwrap_or((f64::NAN, f64::NAN));
        writeln!(
            f,
            "{},{},{},{},{},{},{},{},{},{},{}",
            i,
            log.steps,
            log.evals,
            log.best_cost,
            log.error_vs_exact,
            log.total_gates,
            log.cnot,
            log.rot,
            log.xi,
            epsilon,
            wall
        )?;
    }
    Ok(())
}

/// Greedy policy wrapper around a trained network.
pub fn greedy_policy(net: &QNetwork) -> impl FnMut(&[f64], &[bool]) -> usize + '_ {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    move |obs, mask| select_action(net, obs, 0.0, mask, &mut rng).expect("legal action exists")
}

/// Evaluate a finished run directory. Compiling runs roll the greedy policy
/// over fresh targets per tolerance and write `eval.csv`; architecture-search
/// runs report greedy-episode best errors; the diagnostic chain prints the
/// learned values against the value-iteration oracle.
pub fn run_eval(
    run_dir: &Path,
    n_targets: usize,
    tolerances: &[f64],
    seed: u64,
) -> Result<String, HarnessError> {
    let cfg = ExperimentConfig::load(&run_dir.join("config.snapshot"))?;
    let net = QNetwork::load(&run_dir.join("net.ckpt"))?;
    match cfg.kind {
        ExperimentKind::Compile => {
            let compile = build_compile_config(&cfg)?;
            let tols: Vec<f64> = if tolerances.is_empty() {
                vec![compile.tolerance]
            } else {
                tolerances.to_vec()
            };
            let mut policy = greedy_policy(&net);
            let rows = rf_env_compile::evaluate(&compile, &mut policy, n_targets, &tols, seed);
            rf_env_compile::write_eval_csv(&run_dir.join("eval.csv"), &rows)?;
            let mut out = String::from("tolerance success_rate mean_fidelity mean_len\n");
            for r in &rows {
                out.push_str(&format!(
                    "{:9} {:12.4} {:13.4} {:8.2}\n",
                    r.tolerance, r.success_rate, r.mean_fidelity, r.mean_len
                ));
            }
            Ok(out)
        }
        ExperimentKind::Qas | ExperimentKind::Transfer => {
            let mut env = build_env(&cfg, None)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut best = f64::INFINITY;
            for _ in 0..n_targets.max(1) {
                let mut obs = env.as_env_mut().reset(&mut rng);
                loop {
                    let mask = env.as_env().legal_mask();
                    let a = select_action(&net, &obs, 0.0, &mask, &mut rng)
                        .map_err(|e| HarnessError::numeric(e))?;
                    let out = env.as_env_mut().step(a, &mut rng);
                    if let Some(m) = out.metric {
                        best = best.min(m);
                    }
                    obs = out.observation;
                    if out.done {
                        break;
                    }
                }
            }
            Ok(format!("greedy episodes: {}, best energy error: {best:.6}\n", n_targets.max(1)))
        }
        ExperimentKind::Diag => {
            let chain = ChainConfig {
                length: cfg.env.length.unwrap_or(6),
                slip: cfg.env.slip.unwrap_or(0.0),
                max_steps: cfg.env.max_steps.unwrap_or(48),
            };
            let oracle = crate::chain::value_iteration(&chain, cfg.agent.gamma);
            let mut out = String::from("state learned oracle\n");
            for s in 0..chain.length - 1 {
                let mut obs = vec![0.0; chain.length];
                obs[s] = 1.0;
                let q = net.forward(&obs).map_err(HarnessError::numeric)?;
                let v = q.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                out.push_str(&format!("{s:5} {v:8.4} {:7.4}\n", oracle[s]));
            }
            Ok(out)
        }
    }
}

/// Exact ground energy for the configured task (used by eval reporting).
pub fn reference_energy(cfg: &ExperimentConfig) -> Result<f64, HarnessError> {
    let h = load_hamiltonian(&cfg.env)?;
    Ok(exact_ground_energy(&h)?)
}

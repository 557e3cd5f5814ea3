use crate::config::{
    AgentSection, EnvSection, ExperimentConfig, ExperimentKind, ReplaySection, TransferSection,
};
use crate::HarnessError;

/// Names of all shipped presets; each resolves at paper scale and, with the
/// desk flag, at a scale that finishes on a workstation. Desk variants shrink
/// episode counts, network widths and optimizer budgets, never formulas.
pub fn shipped_configs() -> &'static [&'static str] {
    &[
        "compile_1q_smallrot",
        "compile_1q_hrc",
        "compile_2q",
        "qas_heisenberg_2q",
        "qas_heisenberg_3q",
        "qas_heisenberg_4q",
        "qas_heisenberg_5q",
        "transfer_heisenberg_3q",
        "diag_chain",
    ]
}

fn compile_agent() -> AgentSection {
    AgentSection {
        gamma: 0.99,
        lr: 3e-4,
        batch_size: 200,
        hidden: vec![128, 128],
        activation: "relu".into(),
        target_sync: "episodes".into(),
        target_sync_every: 100,
        grad_clip: 1.0,
        eps_start: 1.0,
        eps_min: 0.01,
        eps_decay: 0.99931,
        eps_decay_per: "episode".into(),
        n_step: 1,
        double_q: false,
        loss: "huber".into(),
        warmup: 1000,
        learn_every: 1,
    }
}

fn annealed_replay(capacity: usize, t_ann: u64) -> ReplaySection {
    ReplaySection {
        strategy: "reaper_plus".into(),
        capacity,
        alpha: 0.4,
        omega: 0.2,
        beta0: 0.4,
        beta_anneal_frames: 100_000,
        omega_min: 0.1,
        omega_max: 0.7,
        t_ann,
        epsilon_priority: 1e-6,
    }
}

fn qas_agent() -> AgentSection {
    AgentSection {
        gamma: 0.005,
        lr: 3e-4,
        batch_size: 1000,
        hidden: vec![1000, 1000, 1000],
        activation: "relu".into(),
        target_sync: "steps".into(),
        target_sync_every: 500,
        grad_clip: 1.0,
        eps_start: 1.0,
        eps_min: 0.05,
        eps_decay: 0.99995,
        eps_decay_per: "step".into(),
        n_step: 5,
        double_q: true,
        loss: "huber".into(),
        warmup: 1000,
        learn_every: 1,
    }
}

fn qas_env(n: usize, l_max: usize, encoding: &str, m: u32, t_s: u32) -> EnvSection {
    EnvSection {
        n_qubits: Some(n),
        l_max: Some(l_max),
        encoding: Some(encoding.into()),
        hamiltonian: Some("heisenberg".into()),
        m: Some(m),
        t_s: Some(t_s),
        vqe_method: Some("nelder_mead".into()),
        vqe_max_iter: Some(1000),
        accept_error_init: Some(5.5),
        shift_ball: Some(0.001),
        shift_time: Some(2000),
        success_switch: Some(5.5),
        success_threshold: Some(50),
        p1: Some(0.0),
        p2: Some(0.0),
        trajectories: Some(256),
        ..Default::default()
    }
}

fn compile_preset(name: &str, desk: bool) -> ExperimentConfig {
    let (gateset, reward, tolerance) = match name {
        "compile_1q_smallrot" => ("small_rotations_1q", "dense", 0.9999),
        "compile_1q_hrc" => ("hrc_1q", "sparse", 0.99),
        _ => ("two_qubit", "dense", 0.9914),
    };
    let mut cfg = ExperimentConfig {
        kind: ExperimentKind::Compile,
        preset: name.into(),
        seeds: vec![1, 2, 3],
        output_dir: format!("out/{name}"),
        desk_scale: desk,
        episodes: 50_000,
        env: EnvSection {
            gateset: Some(gateset.into()),
            tolerance: Some(tolerance),
            max_len: Some(130),
            reward_mode: Some(reward.into()),
            target_source: Some(if name == "compile_2q" { "random_circuit" } else { "haar" }.into()),
            target_min_gates: Some(6),
            target_max_gates: Some(9999),
            fidelity_squared: Some(false),
            ..Default::default()
        },
        agent: compile_agent(),
        replay: annealed_replay(500_000, 500_000),
        transfer: TransferSection::default(),
    };
    if desk {
        cfg.episodes = 3000;
        cfg.agent.batch_size = 64;
        cfg.agent.warmup = 256;
        cfg.replay.capacity = 50_000;
        cfg.replay.t_ann = 5000;
        cfg.replay.beta_anneal_frames = 5000;
        match name {
            "compile_1q_smallrot" => {
                // short reachable targets and a loose tolerance
                cfg.env.tolerance = Some(0.9);
                cfg.env.target_source = Some("random_circuit".into());
                cfg.env.target_min_gates = Some(1);
                cfg.env.target_max_gates = Some(20);
            }
            "compile_1q_hrc" => {
                cfg.episodes = 800;
                cfg.env.tolerance = Some(0.95);
                cfg.env.max_len = Some(60);
            }
            _ => {
                cfg.episodes = 2000;
                cfg.env.tolerance = Some(0.95);
                cfg.env.max_len = Some(80);
                cfg.env.target_min_gates = Some(6);
                cfg.env.target_max_gates = Some(50);
            }
        }
    }
    cfg
}

fn qas_preset(name: &str, desk: bool) -> ExperimentConfig {
    let n: usize = match name {
        "qas_heisenberg_2q" => 2,
        "qas_heisenberg_3q" => 3,
        "qas_heisenberg_4q" => 4,
        _ => 5,
    };
    let encoding = if n == 5 { "II" } else { "I" };
    let l_max_paper = [20, 30, 50, 70][n - 2];
    let mut cfg = ExperimentConfig {
        kind: ExperimentKind::Qas,
        preset: name.into(),
        seeds: vec![1, 2, 3],
        output_dir: format!("out/{name}"),
        desk_scale: desk,
        episodes: 5000,
        env: qas_env(n, l_max_paper, encoding, 10, l_max_paper as u32),
        agent: qas_agent(),
        replay: ReplaySection {
            strategy: "reaper_plus".into(),
            capacity: 20_000,
            alpha: 0.4,
            omega: 0.2,
            beta0: 0.4,
            beta_anneal_frames: 100_000,
            omega_min: 0.1,
            omega_max: 0.7,
            t_ann: 50_000,
            epsilon_priority: 1e-6,
        },
        transfer: TransferSection::default(),
    };
    if desk {
        cfg.episodes = 300;
        cfg.agent.hidden = vec![256, 256, 256];
        cfg.agent.batch_size = 64;
        cfg.agent.warmup = 128;
        cfg.agent.eps_decay = 0.9995;
        cfg.env.l_max = Some([6, 8, 10, 12][n - 2]);
        cfg.env.t_s = Some(20);
        cfg.env.m = Some(5);
        cfg.env.vqe_max_iter = Some(250);
        cfg.replay.t_ann = 3000;
        cfg.replay.beta_anneal_frames = 3000;
    }
    cfg
}

fn transfer_preset(desk: bool) -> ExperimentConfig {
    let mut cfg = qas_preset("qas_heisenberg_3q", desk);
    cfg.kind = ExperimentKind::Transfer;
    cfg.preset = "transfer_heisenberg_3q".into();
    cfg.output_dir = "out/transfer_heisenberg_3q".into();
    cfg.seeds = vec![1, 2, 3, 4, 5];
    // transfer experiments isolate the warm start under uniform replay
    cfg.replay.strategy = "uniform".into();
    cfg.env.p1 = Some(0.001);
    cfg.env.p2 = Some(0.005);
    cfg.transfer = TransferSection {
        source_episodes: if desk { 120 } else { 2000 },
        target_episodes: if desk { 150 } else { 2000 },
        target_eps_start: 0.55,
        threshold_scale: if desk { 150.0 } else { 1.0 },
        weights: [0.4, 0.1, 0.2, 0.3],
        keep_source_priorities: false,
    };
    if desk {
        cfg.agent.hidden = vec![128, 128];
        cfg.env.vqe_max_iter = Some(150);
    }
    cfg
}

fn diag_preset(desk: bool) -> ExperimentConfig {
    ExperimentConfig {
        kind: ExperimentKind::Diag,
        preset: "diag_chain".into(),
        seeds: vec![1, 2, 3],
        output_dir: "out/diag_chain".into(),
        desk_scale: desk,
        episodes: 500,
        env: EnvSection {
            length: Some(6),
            slip: Some(0.0),
            max_steps: Some(48),
            ..Default::default()
        },
        agent: AgentSection {
            gamma: 0.9,
            lr: 1e-3,
            batch_size: 32,
            hidden: vec![32],
            activation: "relu".into(),
            target_sync: "episodes".into(),
            target_sync_every: 5,
            grad_clip: 1.0,
            eps_start: 1.0,
            eps_min: 0.05,
            eps_decay: 0.99,
            eps_decay_per: "episode".into(),
            n_step: 1,
            double_q: false,
            loss: "huber".into(),
            warmup: 64,
            learn_every: 1,
        },
        replay: ReplaySection {
            strategy: "uniform".into(),
            capacity: 5000,
            alpha: 0.6,
            omega: 0.2,
            beta0: 0.4,
            beta_anneal_frames: 2000,
            omega_min: 0.1,
            omega_max: 0.7,
            t_ann: 2000,
            epsilon_priority: 1e-6,
        },
        transfer: TransferSection::default(),
    }
}

/// Resolve a named preset at paper or desk scale.
pub fn preset(name: &str, desk: bool) -> Result<ExperimentConfig, HarnessError> {
    let cfg = match name {
        "compile_1q_smallrot" | "compile_1q_hrc" | "compile_2q" => compile_preset(name, desk),
        "qas_heisenberg_2q" | "qas_heisenberg_3q" | "qas_heisenberg_4q" | "qas_heisenberg_5q" => {
            qas_preset(name, desk)
        }
        "transfer_heisenberg_3q" => transfer_preset(desk),
        "diag_chain" => diag_preset(desk),
        other => {
            return Err(HarnessError::config(format!(
                "unknown preset '{other}'; shipped presets: {}",
                shipped_configs().join(", ")
            )))
        }
    };
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_values_survive_in_the_presets() {
        let c = preset("compile_1q_smallrot", false).unwrap();
        assert_eq!(c.agent.gamma, 0.99);
        assert_eq!(c.agent.lr, 3e-4);
        assert_eq!(c.agent.batch_size, 200);
        assert_eq!(c.replay.capacity, 500_000);
        assert_eq!(c.agent.eps_decay, 0.99931);
        assert_eq!(c.agent.eps_min, 0.01);
        assert_eq!(c.agent.target_sync_every, 100);
        assert_eq!(c.agent.grad_clip, 1.0);
        assert_eq!(c.agent.hidden, vec![128, 128]);
        assert_eq!((c.replay.omega_min, c.replay.omega_max), (0.1, 0.7));
        assert_eq!(c.replay.t_ann, 500_000);
        assert_eq!(c.replay.alpha, 0.4);
        assert_eq!(c.replay.beta0, 0.4);

        let q = preset("qas_heisenberg_3q", false).unwrap();
        assert_eq!(q.replay.capacity, 20_000);
        assert_eq!(q.agent.batch_size, 1000);
        assert_eq!(q.agent.hidden, vec![1000, 1000, 1000]);
        assert_eq!(q.agent.n_step, 5);
        assert_eq!(q.agent.target_sync, "steps");
        assert_eq!(q.agent.target_sync_every, 500);
        assert_eq!(q.agent.gamma, 0.005);
        assert_eq!(q.agent.eps_decay, 0.99995);
        assert!(q.agent.double_q);
        assert_eq!(q.env.m, Some(10));
        assert_eq!(q.env.shift_ball, Some(0.001));
        assert_eq!(q.env.shift_time, Some(2000));
        assert_eq!(q.env.success_threshold, Some(50));
        assert_eq!(q.env.vqe_max_iter, Some(1000));

        let t = preset("transfer_heisenberg_3q", true).unwrap();
        assert_eq!(t.transfer.weights, [0.4, 0.1, 0.2, 0.3]);
        assert_eq!(t.transfer.target_eps_start, 0.55);
        assert_eq!(t.replay.strategy, "uniform");
        assert_eq!((t.env.p1, t.env.p2), (Some(0.001), Some(0.005)));
    }

    #[test]
    fn desk_variants_shrink_but_keep_formulas() {
        let paper = preset("qas_heisenberg_3q", false).unwrap();
        let desk = preset("qas_heisenberg_3q", true).unwrap();
        assert!(desk.episodes < paper.episodes);
        assert!(desk.agent.hidden.iter().sum::<usize>() < paper.agent.hidden.iter().sum::<usize>());
        // formula-bearing knobs stay
        assert_eq!(desk.env.shift_ball, paper.env.shift_ball);
        assert_eq!(desk.env.accept_error_init, paper.env.accept_error_init);
        assert_eq!(desk.replay.strategy, paper.replay.strategy);
        assert_eq!(desk.agent.gamma, paper.agent.gamma);
        // criterion inputs of the smoke tests
        assert_eq!(desk.env.m, Some(5));
        let c = preset("compile_1q_smallrot", true).unwrap();
        assert_eq!(c.env.tolerance, Some(0.9));
        assert_eq!(c.env.target_max_gates, Some(20));
        assert_eq!(c.env.max_len, Some(130));
        assert_eq!(c.episodes, 3000);
    }

    #[test]
    fn unknown_preset_is_a_config_error() {
        let err = preset("wat", false).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}

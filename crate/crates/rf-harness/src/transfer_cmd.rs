use std::path::{Path, PathBuf};

use rf_qcore::NoiseModel;
use rf_transfer::{
    run_transfer, ReplaySettings, SourceSpec, TransferReport, TransferRunConfig, CHEMICAL_ACCURACY,
};

use crate::config::ExperimentConfig;
use crate::runner::{build_agent_config, build_qas_config, build_replay_plan};
use crate::HarnessError;

/// Assemble the full transfer protocol from an experiment config, optionally
/// loading the source buffer from a file instead of training it, and
/// optionally overriding the noise strengths.
pub fn build_transfer_config(
    cfg: &ExperimentConfig,
    noise_override: Option<NoiseModel>,
) -> Result<TransferRunConfig, HarnessError> {
    let qas = build_qas_config(cfg, None)?;
    let agent = build_agent_config(cfg)?;
    let plan = build_replay_plan(cfg)?;
    let noise = noise_override.unwrap_or(NoiseModel {
        p1: cfg.env.p1.unwrap_or(0.001),
        p2: cfg.env.p2.unwrap_or(0.005),
    });
    Ok(TransferRunConfig {
        qas,
        agent,
        replay: ReplaySettings {
            strategy: plan.strategy,
            capacity: plan.capacity,
            spec: plan.spec,
            schedule: plan.schedule,
        },
        noise,
        target_episodes: cfg.transfer.target_episodes,
        target_eps_start: cfg.transfer.target_eps_start,
        threshold: CHEMICAL_ACCURACY * cfg.transfer.threshold_scale,
        seeds: cfg.seeds.clone(),
        weights: cfg.transfer.weights,
        keep_source_priorities: cfg.transfer.keep_source_priorities,
    })
}

/// Run the transfer experiment and write the report JSON.
pub fn run_transfer_cmd(
    cfg: &ExperimentConfig,
    source_buffer: Option<&Path>,
    noise_override: Option<NoiseModel>,
    out: Option<&Path>,
) -> Result<(TransferReport, PathBuf), HarnessError> {
    let run_cfg = build_transfer_config(cfg, noise_override)?;
    let source = match source_buffer {
        None => SourceSpec::TrainFresh { episodes: cfg.transfer.source_episodes },
        Some(path) => {
            let mut file = std::fs::File::open(path)
                .map_err(|e| HarnessError::io(format!("{}: {e}", path.display())))?;
            let plan = build_replay_plan(cfg)?;
            let buffer = rf_replay::deserialize(&mut file, plan.spec, plan.schedule)?;
            SourceSpec::LoadedBuffer { buffer, file: path.to_path_buf() }
        }
    };
    let report = run_transfer(&run_cfg, &source).map_err(HarnessError::from)?;
    let out_path = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from(&cfg.output_dir).join("transfer_report.json"));
    if let Some(parent) = out_path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(&out_path, serde_json::to_string_pretty(&report).expect("report json"))?;
    Ok((report, out_path))
}

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::HarnessError;

/// The on-disk experiment description: structured key/value sections, one
/// file (or named preset) per experiment. Environment variables of the form
/// `RF_OVERRIDE_<section>_<key>=<value>` (or `RF_OVERRIDE_<key>` for
/// top-level fields) override single entries for sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub preset: String,
    pub seeds: Vec<u64>,
    pub output_dir: String,
    #[serde(default)]
    pub desk_scale: bool,
    pub episodes: u64,
    pub env: EnvSection,
    pub agent: AgentSection,
    pub replay: ReplaySection,
    #[serde(default)]
    pub transfer: TransferSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Compile,
    Qas,
    Transfer,
    Diag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvSection {
    // compiling
    #[serde(default)]
    pub gateset: Option<String>,
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub max_len: Option<usize>,
    #[serde(default)]
    pub reward_mode: Option<String>,
    #[serde(default)]
    pub target_source: Option<String>,
    #[serde(default)]
    pub target_min_gates: Option<usize>,
    #[serde(default)]
    pub target_max_gates: Option<usize>,
    #[serde(default)]
    pub fidelity_squared: Option<bool>,
    // architecture search
    #[serde(default)]
    pub n_qubits: Option<usize>,
    #[serde(default)]
    pub l_max: Option<usize>,
    #[serde(default)]
    pub encoding: Option<String>,
    /// `heisenberg` or a path to a Pauli-sum Hamiltonian file.
    #[serde(default)]
    pub hamiltonian: Option<String>,
    #[serde(default)]
    pub m: Option<u32>,
    #[serde(default)]
    pub t_s: Option<u32>,
    #[serde(default)]
    pub vqe_method: Option<String>,
    #[serde(default)]
    pub vqe_max_iter: Option<usize>,
    #[serde(default)]
    pub accept_error_init: Option<f64>,
    #[serde(default)]
    pub shift_ball: Option<f64>,
    #[serde(default)]
    pub shift_time: Option<u64>,
    #[serde(default)]
    pub success_switch: Option<f64>,
    #[serde(default)]
    pub success_threshold: Option<u64>,
    #[serde(default)]
    pub p1: Option<f64>,
    #[serde(default)]
    pub p2: Option<f64>,
    #[serde(default)]
    pub trajectories: Option<usize>,
    // diagnostic chain
    #[serde(default)]
    pub length: Option<usize>,
    #[serde(default)]
    pub slip: Option<f64>,
    #[serde(default)]
    pub max_steps: Option<usize>,
}

impl Default for EnvSection {
    fn default() -> Self {
        Self {
            gateset: None,
            tolerance: None,
            max_len: None,
            reward_mode: None,
            target_source: None,
            target_min_gates: None,
            target_max_gates: None,
            fidelity_squared: None,
            n_qubits: None,
            l_max: None,
            encoding: None,
            hamiltonian: None,
            m: None,
            t_s: None,
            vqe_method: None,
            vqe_max_iter: None,
            accept_error_init: None,
            shift_ball: None,
            shift_time: None,
            success_switch: None,
            success_threshold: None,
            p1: None,
            p2: None,
            trajectories: None,
            length: None,
            slip: None,
            max_steps: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSection {
    pub gamma: f64,
    pub lr: f64,
    pub batch_size: usize,
    pub hidden: Vec<usize>,
    pub activation: String,
    pub target_sync: String,
    pub target_sync_every: u64,
    pub grad_clip: f64,
    pub eps_start: f64,
    pub eps_min: f64,
    pub eps_decay: f64,
    pub eps_decay_per: String,
    pub n_step: usize,
    pub double_q: bool,
    pub loss: String,
    pub warmup: usize,
    pub learn_every: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReplaySection {
    pub strategy: String,
    pub capacity: usize,
    pub alpha: f64,
    pub omega: f64,
    pub beta0: f64,
    pub beta_anneal_frames: u64,
    pub omega_min: f64,
    pub omega_max: f64,
    pub t_ann: u64,
    pub epsilon_priority: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferSection {
    pub source_episodes: u64,
    pub target_episodes: u64,
    pub target_eps_start: f64,
    /// Error threshold = chemical accuracy (1.6e-3) times this scale.
    pub threshold_scale: f64,
    pub weights: [f64; 4],
    pub keep_source_priorities: bool,
}

impl Default for TransferSection {
    fn default() -> Self {
        Self {
            source_episodes: 120,
            target_episodes: 150,
            target_eps_start: 0.55,
            threshold_scale: 1.0,
            weights: [0.4, 0.1, 0.2, 0.3],
            keep_source_priorities: false,
        }
    }
}

impl ExperimentConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let value: toml::Value =
            toml::from_str(text).map_err(|e| HarnessError::config(format!("bad TOML: {e}")))?;
        Self::from_value(value)
    }

    fn from_value(value: toml::Value) -> Result<Self, HarnessError> {
        let cfg: ExperimentConfig =
            value.try_into().map_err(|e| HarnessError::config(format!("bad config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Parse with `RF_OVERRIDE_*` environment overrides applied onto the raw
    /// TOML tree before typing.
    pub fn from_toml_with_overrides(
        text: &str,
        overrides: &[(String, String)],
    ) -> Result<Self, HarnessError> {
        let mut value: toml::Value =
            toml::from_str(text).map_err(|e| HarnessError::config(format!("bad TOML: {e}")))?;
        apply_overrides(&mut value, overrides)?;
        Self::from_value(value)
    }

    /// Collect `RF_OVERRIDE_*` pairs from the process environment.
    pub fn env_overrides() -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = std::env::vars()
            .filter_map(|(k, v)| {
                k.strip_prefix("RF_OVERRIDE_").map(|rest| (rest.to_string(), v))
            })
            .collect();
        out.sort();
        out
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.seeds.is_empty() {
            return Err(HarnessError::config("at least one seed required"));
        }
        if self.episodes == 0 {
            return Err(HarnessError::config("episodes must be positive"));
        }
        if !(0.0 < self.agent.gamma && self.agent.gamma <= 1.0) {
            return Err(HarnessError::config("gamma must lie in (0, 1]"));
        }
        if self.agent.eps_min > self.agent.eps_start {
            return Err(HarnessError::config("eps_min must not exceed eps_start"));
        }
        if self.agent.n_step == 0 {
            return Err(HarnessError::config("n_step must be at least 1"));
        }
        rf_replay::Strategy::parse(&self.replay.strategy)
            .ok_or_else(|| HarnessError::config(format!("unknown strategy '{}'", self.replay.strategy)))?;
        if let Some(h) = &self.env.hamiltonian {
            if h != "heisenberg" && !Path::new(h).exists() {
                return Err(HarnessError::config(format!("hamiltonian file '{h}' does not exist")));
            }
        }
        Ok(())
    }
}

/// Apply `section_key=value` pairs onto the TOML tree. The first path
/// component must be one of the section names (`env`, `agent`, `replay`,
/// `transfer`); anything else is treated as a top-level key.
fn apply_overrides(value: &mut toml::Value, overrides: &[(String, String)]) -> Result<(), HarnessError> {
    for (key, raw) in overrides {
        let parsed: toml::Value = parse_scalar(raw);
        let table = value
            .as_table_mut()
            .ok_or_else(|| HarnessError::config("config root must be a table"))?;
        let mut placed = false;
        for section in ["env", "agent", "replay", "transfer"] {
            if let Some(rest) = key.strip_prefix(&format!("{section}_")) {
                let entry = table
                    .entry(section)
                    .or_insert_with(|| toml::Value::Table(Default::default()));
                let section_table = entry
                    .as_table_mut()
                    .ok_or_else(|| HarnessError::config(format!("section {section} is not a table")))?;
                section_table.insert(rest.to_string(), parsed.clone());
                placed = true;
                break;
            }
        }
        if !placed {
            table.insert(key.clone(), parsed);
        }
    }
    Ok(())
}

/// Interpret an override value: TOML literal when it parses as one
/// (numbers, booleans, arrays), bare string otherwise.
fn parse_scalar(raw: &str) -> toml::Value {
    let attempt = format!("v = {raw}");
    if let Ok(toml::Value::Table(t)) = toml::from_str::<toml::Value>(&attempt) {
        if let Some(v) = t.get("v") {
            return v.clone();
        }
    }
    toml::Value::String(raw.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::shipped_configs;

    #[test]
    fn round_trip_is_identity_for_every_preset() {
        for name in shipped_configs() {
            for desk in [false, true] {
                let cfg = crate::presets::preset(name, desk).unwrap();
                let text = cfg.to_toml();
                let parsed = ExperimentConfig::from_toml(&text).unwrap();
                assert_eq!(cfg, parsed, "{name} desk={desk}");
                // and once more around
                let again = ExperimentConfig::from_toml(&parsed.to_toml()).unwrap();
                assert_eq!(parsed, again);
            }
        }
    }

    #[test]
    fn overrides_reach_sections_and_top_level() {
        let base = crate::presets::preset("diag_chain", true).unwrap().to_toml();
        let overrides = vec![
            ("agent_lr".to_string(), "0.005".to_string()),
            ("episodes".to_string(), "42".to_string()),
            ("replay_strategy".to_string(), "per".to_string()),
            ("env_slip".to_string(), "0.25".to_string()),
        ];
        let cfg = ExperimentConfig::from_toml_with_overrides(&base, &overrides).unwrap();
        assert_eq!(cfg.agent.lr, 0.005);
        assert_eq!(cfg.episodes, 42);
        assert_eq!(cfg.replay.strategy, "per");
        assert_eq!(cfg.env.slip, Some(0.25));
    }

    #[test]
    fn bad_configs_are_rejected() {
        let base = crate::presets::preset("diag_chain", true).unwrap();
        let mut broken = base.clone();
        broken.seeds.clear();
        assert!(ExperimentConfig::from_toml(&broken.to_toml()).is_err());
        let mut broken = base.clone();
        broken.replay.strategy = "surprise".into();
        assert!(ExperimentConfig::from_toml(&broken.to_toml()).is_err());
        let mut broken = base;
        broken.agent.gamma = 0.0;
        assert!(ExperimentConfig::from_toml(&broken.to_toml()).is_err());
        assert!(ExperimentConfig::from_toml("kind = wat").is_err());
    }
}

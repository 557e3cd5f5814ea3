/// Which replay rule a buffer runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Uniform,
    Her,
    Per,
    ReaPer,
    ReaPerPlus,
}

impl Strategy {
    pub fn is_prioritized(self) -> bool {
        matches!(self, Strategy::Per | Strategy::ReaPer | Strategy::ReaPerPlus)
    }

    pub fn uses_reliability(self) -> bool {
        matches!(self, Strategy::ReaPer | Strategy::ReaPerPlus)
    }

    pub fn tag(self) -> u8 {
        match self {
            Strategy::Uniform => 0,
            Strategy::Her => 1,
            Strategy::Per => 2,
            Strategy::ReaPer => 3,
            Strategy::ReaPerPlus => 4,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        Some(match tag {
            0 => Strategy::Uniform,
            1 => Strategy::Her,
            2 => Strategy::Per,
            3 => Strategy::ReaPer,
            4 => Strategy::ReaPerPlus,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Uniform => "uniform",
            Strategy::Her => "her",
            Strategy::Per => "per",
            Strategy::ReaPer => "reaper",
            Strategy::ReaPerPlus => "reaper_plus",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "uniform" => Strategy::Uniform,
            "her" => Strategy::Her,
            "per" => Strategy::Per,
            "reaper" => Strategy::ReaPer,
            "reaper_plus" => Strategy::ReaPerPlus,
            _ => return None,
        })
    }
}

/// Prioritization knobs shared by PER, ReaPER and ReaPER+.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrioritySpec {
    /// TD-error exponent.
    pub alpha: f64,
    /// Fixed reliability exponent (ReaPER).
    pub omega: f64,
    /// Initial importance-sampling correction.
    pub beta0: f64,
    /// Frames over which beta anneals linearly to 1.
    pub beta_anneal_frames: u64,
    /// Added to `|delta|` before exponentiation so no priority is exactly zero.
    pub epsilon_priority: f64,
}

impl Default for PrioritySpec {
    fn default() -> Self {
        Self { alpha: 0.6, omega: 0.2, beta0: 0.4, beta_anneal_frames: 100_000, epsilon_priority: 1e-6 }
    }
}

impl PrioritySpec {
    /// Linearly annealed beta at frame `tau`, clamped to `[beta0, 1]`.
    pub fn beta_at(&self, tau: u64) -> f64 {
        if self.beta_anneal_frames == 0 {
            return 1.0;
        }
        let frac = (tau as f64 / self.beta_anneal_frames as f64).min(1.0);
        self.beta0 + (1.0 - self.beta0) * frac
    }
}

/// Linear annealing schedule for the ReaPER+ reliability exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaSchedule {
    pub omega_min: f64,
    pub omega_max: f64,
    pub t_ann: u64,
}

impl Default for OmegaSchedule {
    fn default() -> Self {
        Self { omega_min: 0.1, omega_max: 0.7, t_ann: 500_000 }
    }
}

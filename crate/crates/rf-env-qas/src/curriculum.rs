/// Moving-threshold settings; energies in the Hamiltonian's units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurriculumConfig {
    /// Initial acceptance error above the reference energy.
    pub accept_error_init: f64,
    /// Tightening applied every `shift_time` episodes.
    pub shift_ball: f64,
    pub shift_time: u64,
    /// Cap on the success-triggered jump.
    pub success_switch: f64,
    /// Successes at the current threshold before the jump fires.
    pub success_threshold: u64,
    /// Margin added above the best seen cost on a success jump.
    pub chem_margin: f64,
}

impl Default for CurriculumConfig {
    fn default() -> Self {
        Self {
            accept_error_init: 5.5,
            shift_ball: 0.001,
            shift_time: 2000,
            success_switch: 5.5,
            success_threshold: 50,
            chem_margin: 1.6e-3,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EpisodeResult {
    pub success: bool,
    pub best_cost: f64,
}

/// The acceptance threshold `xi` tightens on two triggers: every
/// `shift_time` episodes it drops by `shift_ball`, and once
/// `success_threshold` successes accumulate it jumps down toward the best
/// cost seen (never below `best + chem_margin`, never by more than
/// `success_switch`). `xi` never rises.
#[derive(Debug, Clone)]
pub struct Curriculum {
    config: CurriculumConfig,
    xi: f64,
    episodes_seen: u64,
    success_count: u64,
    best_cost: f64,
}

impl Curriculum {
    pub fn new(config: CurriculumConfig, reference_energy: f64) -> Self {
        Self {
            xi: reference_energy + config.accept_error_init,
            config,
            episodes_seen: 0,
            success_count: 0,
            best_cost: f64::INFINITY,
        }
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn success_count(&self) -> u64 {
        self.success_count
    }

    pub fn update(&mut self, result: &EpisodeResult) {
        self.episodes_seen += 1;
        self.best_cost = self.best_cost.min(result.best_cost);
        if result.success {
            self.success_count += 1;
        }
        if self.episodes_seen % self.config.shift_time == 0 {
            self.xi -= self.config.shift_ball;
        }
        if self.success_count >= self.config.success_threshold {
            let candidate =
                (self.best_cost + self.config.chem_margin).max(self.xi - self.config.success_switch);
            if candidate < self.xi {
                self.xi = candidate;
            }
            self.success_count = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curriculum() -> Curriculum {
        Curriculum::new(CurriculumConfig::default(), -5.0)
    }

    #[test]
    fn initial_threshold_and_time_shift() {
        let mut c = curriculum();
        assert!((c.xi() - 0.5).abs() < 1e-12); // -5.0 + 5.5
        for _ in 0..2000 {
            c.update(&EpisodeResult { success: false, best_cost: 1.0 });
        }
        assert!((c.xi() - (0.5 - 0.001)).abs() < 1e-12, "one shift after 2000 episodes");
    }

    #[test]
    fn zero_episodes_leave_xi_unchanged() {
        let c = curriculum();
        assert!((c.xi() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn success_jump_tightens_toward_best_cost() {
        let mut c = curriculum();
        for _ in 0..50 {
            c.update(&EpisodeResult { success: true, best_cost: -4.9 });
        }
        // jump lands at best + margin (the success_switch cap is not binding)
        assert!((c.xi() - (-4.9 + 1.6e-3)).abs() < 1e-9, "xi = {}", c.xi());
        assert_eq!(c.success_count(), 0, "counter resets after the jump");
    }

    #[test]
    fn xi_is_monotone_nonincreasing_over_many_episodes() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let mut c = curriculum();
        let mut prev = c.xi();
        for _ in 0..10_000 {
            c.update(&EpisodeResult {
                success: rng.gen_bool(0.3),
                best_cost: rng.gen_range(-5.0..3.0),
            });
            assert!(c.xi() <= prev + 1e-15);
            prev = c.xi();
        }
    }
}

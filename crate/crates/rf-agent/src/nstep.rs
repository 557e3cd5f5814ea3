use std::collections::VecDeque;

use rf_replay::Transition;

use crate::AgentError;

/// Collapses `n` consecutive transitions into one learning transition with
/// the discounted n-step return. On episode end, shorter windows flush with
/// their actual remaining horizon. For non-terminal emissions the horizon is
/// always exactly `n`, so the learner bootstraps with `gamma^n`.
#[derive(Debug, Clone)]
pub struct NStepAccumulator {
    n: usize,
    gamma: f64,
    window: VecDeque<Transition>,
    episode: Option<u32>,
}

impl NStepAccumulator {
    pub fn new(n: usize, gamma: f64) -> Self {
        assert!(n >= 1);
        Self { n, gamma, window: VecDeque::with_capacity(n), episode: None }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Feed one raw transition; returns the collapsed transitions ready for
    /// the buffer (empty until the window fills, several on episode end).
    pub fn push(&mut self, incoming: Transition) -> Result<Vec<Transition>, AgentError> {
        if let Some(ep) = self.episode {
            if ep != incoming.episode_id {
                return Err(AgentError::CrossEpisode { held: ep, got: incoming.episode_id });
            }
        } else {
            self.episode = Some(incoming.episode_id);
        }
        let done = incoming.done;
        let next_state = incoming.next_state.clone();
        self.window.push_back(incoming);
        let mut out = Vec::new();
        if self.window.len() == self.n {
            out.push(self.collapse(&next_state, done));
            self.window.pop_front();
        }
        if done {
            while !self.window.is_empty() {
                out.push(self.collapse(&next_state, true));
                self.window.pop_front();
            }
            self.episode = None;
        }
        Ok(out)
    }

    /// Drop any buffered prefix (used when an episode is abandoned).
    pub fn reset(&mut self) {
        self.window.clear();
        self.episode = None;
    }

    fn collapse(&self, final_next_state: &[f32], done: bool) -> Transition {
        let first = &self.window[0];
        let mut reward = 0.0f64;
        let mut discount = 1.0f64;
        for t in &self.window {
            reward += discount * t.reward as f64;
            discount *= self.gamma;
        }
        Transition {
            state: first.state.clone(),
            action: first.action,
            reward: reward as f32,
            next_state: final_next_state.to_vec(),
            done,
            episode_id: first.episode_id,
            step_in_episode: first.step_in_episode,
            goal: first.goal.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn t(step: u32, reward: f32, done: bool) -> Transition {
        Transition::new(vec![step as f32], 0, reward, vec![step as f32 + 1.0], done, 1, step)
    }

    #[test]
    fn n1_is_identity_passthrough() {
        let mut acc = NStepAccumulator::new(1, 0.9);
        let incoming = t(1, 0.5, false);
        let out = acc.push(incoming.clone()).unwrap();
        assert_eq!(out, vec![incoming]);
    }

    #[test]
    fn three_step_collapse() {
        // rewards [1, 1, 1], gamma 0.5 -> collapsed reward 1.75, next = s_3
        let mut acc = NStepAccumulator::new(3, 0.5);
        assert!(acc.push(t(1, 1.0, false)).unwrap().is_empty());
        assert!(acc.push(t(2, 1.0, false)).unwrap().is_empty());
        let out = acc.push(t(3, 1.0, false)).unwrap();
        assert_eq!(out.len(), 1);
        assert!((out[0].reward - 1.75).abs() < 1e-7);
        assert_eq!(out[0].state, vec![1.0]);
        assert_eq!(out[0].next_state, vec![4.0]);
        assert_eq!(out[0].step_in_episode, 1);
        assert!(!out[0].done);
    }

    #[test]
    fn early_episode_end_flushes_truncated_horizons() {
        let mut acc = NStepAccumulator::new(3, 0.5);
        assert!(acc.push(t(1, 1.0, false)).unwrap().is_empty());
        let out = acc.push(t(2, 2.0, true)).unwrap();
        // two flushed transitions: 2-step return from step 1, 1-step from step 2
        assert_eq!(out.len(), 2);
        assert!((out[0].reward - (1.0 + 0.5 * 2.0)).abs() < 1e-7);
        assert!(out[0].done);
        assert_eq!(out[0].step_in_episode, 1);
        assert!((out[1].reward - 2.0).abs() < 1e-7);
        assert!(out[1].done);
        assert_eq!(out[1].next_state, vec![3.0]);
    }

    #[test]
    fn cross_episode_push_is_rejected() {
        let mut acc = NStepAccumulator::new(3, 0.9);
        acc.push(t(1, 0.0, false)).unwrap();
        let mut alien = t(2, 0.0, false);
        alien.episode_id = 9;
        assert!(matches!(acc.push(alien), Err(AgentError::CrossEpisode { held: 1, got: 9 })));
    }

    #[test]
    fn matches_brute_force_discounted_sums_on_random_episodes() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for n in 1..=8usize {
            for _ in 0..30 {
                let len = rng.gen_range(1..20);
                let gamma: f64 = rng.gen_range(0.1..1.0);
                let rewards: Vec<f32> = (0..len).map(|_| rng.gen_range(-2.0..2.0)).collect();
                let mut acc = NStepAccumulator::new(n, gamma);
                let mut emitted = Vec::new();
                for (i, &r) in rewards.iter().enumerate() {
                    emitted.extend(acc.push(t(i as u32 + 1, r, i == len - 1)).unwrap());
                }
                assert_eq!(emitted.len(), len, "one collapsed transition per source step");
                for tr in &emitted {
                    let start = (tr.step_in_episode - 1) as usize;
                    let horizon = n.min(len - start);
                    let mut want = 0.0f64;
                    for k in 0..horizon {
                        want += gamma.powi(k as i32) * rewards[start + k] as f64;
                    }
                    assert!(
                        (tr.reward as f64 - want).abs() < 1e-5,
                        "n={n} start={start}: {} vs {want}",
                        tr.reward
                    );
                    // non-terminal emissions always carry the full horizon
                    if !tr.done {
                        assert_eq!(horizon, n);
                    }
                }
            }
        }
    }
}

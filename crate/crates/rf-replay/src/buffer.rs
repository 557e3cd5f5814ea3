use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

use crate::formulas::{omega_at, reliability_scores, single_priority};
use crate::{Episode, OmegaSchedule, PrioritySpec, ReplayError, Strategy, SumTree, Transition};

/// Result of drawing one minibatch: slot indices into the buffer and the
/// importance-sampling weights (max weight in the batch is exactly 1).
#[derive(Debug, Clone)]
pub struct SampledBatch {
    pub indices: Vec<usize>,
    pub is_weights: Vec<f64>,
}

/// Ring buffer of transitions with pluggable replay strategy.
///
/// Prioritized strategies keep unnormalized priorities in a [`SumTree`];
/// uniform and HER sample uniformly over live slots. New transitions enter
/// at the running maximum priority so nothing is starved before its first
/// TD evaluation. Eviction is FIFO regardless of priority.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    strategy: Strategy,
    capacity: usize,
    storage: Vec<Transition>,
    write_cursor: usize,
    tree: Option<SumTree>,
    td_plus: Vec<f64>,
    reliability: Vec<f64>,
    episode_slots: BTreeMap<u32, Vec<usize>>,
    stale_episodes: BTreeSet<u32>,
    spec: PrioritySpec,
    schedule: Option<OmegaSchedule>,
    frame_counter: u64,
    max_priority: f64,
    state_dim: usize,
    action_count: usize,
    env_id: String,
}

impl ReplayBuffer {
    pub fn new(
        strategy: Strategy,
        capacity: usize,
        state_dim: usize,
        action_count: usize,
        env_id: impl Into<String>,
        spec: PrioritySpec,
        schedule: Option<OmegaSchedule>,
    ) -> Self {
        assert!(capacity > 0);
        let tree = strategy.is_prioritized().then(|| SumTree::new(capacity));
        Self {
            strategy,
            capacity,
            storage: Vec::new(),
            write_cursor: 0,
            tree,
            td_plus: Vec::new(),
            reliability: Vec::new(),
            episode_slots: BTreeMap::new(),
            stale_episodes: BTreeSet::new(),
            spec,
            schedule,
            frame_counter: 0,
            max_priority: 1.0,
            state_dim,
            action_count,
            env_id: env_id.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.storage.len()
    }

    pub fn is_empty(&self) -> bool {
        self.storage.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn spec(&self) -> &PrioritySpec {
        &self.spec
    }

    pub fn schedule(&self) -> Option<&OmegaSchedule> {
        self.schedule.as_ref()
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn action_count(&self) -> usize {
        self.action_count
    }

    pub fn env_id(&self) -> &str {
        &self.env_id
    }

    pub fn frame_counter(&self) -> u64 {
        self.frame_counter
    }

    pub fn get(&self, slot: usize) -> &Transition {
        &self.storage[slot]
    }

    /// Current annealed reliability exponent for this buffer's strategy.
    pub fn omega_now(&self) -> f64 {
        match self.strategy {
            Strategy::ReaPerPlus => {
                let schedule = self.schedule.unwrap_or_default();
                omega_at(&schedule, self.frame_counter)
            }
            Strategy::ReaPer => self.spec.omega,
            _ => 0.0,
        }
    }

    /// Importance-sampling exponent at the current frame.
    pub fn beta_now(&self) -> f64 {
        self.spec.beta_at(self.frame_counter)
    }

    /// Oldest-to-newest slot order of the ring.
    pub fn slots_in_order(&self) -> Vec<usize> {
        if self.storage.len() < self.capacity {
            (0..self.storage.len()).collect()
        } else {
            (self.write_cursor..self.capacity).chain(0..self.write_cursor).collect()
        }
    }

    pub fn iter_in_order(&self) -> impl Iterator<Item = &Transition> {
        self.slots_in_order().into_iter().map(|s| &self.storage[s])
    }

    /// Insert one transition; evicts the oldest slot when full. The new slot
    /// enters at the running maximum priority. Advances the frame counter.
    pub fn insert(&mut self, t: Transition) {
        debug_assert_eq!(t.state.len(), self.state_dim, "state dim mismatch");
        let slot = if self.storage.len() < self.capacity {
            self.storage.push(t);
            self.td_plus.push(0.0);
            self.reliability.push(1.0);
            self.storage.len() - 1
        } else {
            let slot = self.write_cursor;
            let old_ep = self.storage[slot].episode_id;
            if let Some(slots) = self.episode_slots.get_mut(&old_ep) {
                slots.retain(|&s| s != slot);
                if slots.is_empty() {
                    self.episode_slots.remove(&old_ep);
                    self.stale_episodes.remove(&old_ep);
                }
            }
            self.storage[slot] = t;
            self.td_plus[slot] = 0.0;
            self.reliability[slot] = 1.0;
            slot
        };
        self.write_cursor = (self.write_cursor + 1) % self.capacity;
        let ep = self.storage[slot].episode_id;
        self.episode_slots.entry(ep).or_default().push(slot);
        if let Some(tree) = &mut self.tree {
            tree.set(slot, self.max_priority);
        }
        self.frame_counter += 1;
    }

    /// Draw `batch_size` slots proportionally to the current priorities
    /// (uniformly for uniform/HER). Stale episodes touched by the draw get
    /// their reliability recomputed afterwards.
    pub fn sample<R: Rng>(&mut self, batch_size: usize, rng: &mut R) -> Result<SampledBatch, ReplayError> {
        let n = self.storage.len();
        if n == 0 {
            return Err(ReplayError::Empty);
        }
        if batch_size > n {
            return Err(ReplayError::BatchTooLarge { batch: batch_size, len: n });
        }
        let beta = self.beta_now();
        let (indices, is_weights) = match &self.tree {
            None => {
                let indices: Vec<usize> = (0..batch_size).map(|_| rng.gen_range(0..n)).collect();
                (indices, vec![1.0; batch_size])
            }
            Some(tree) => {
                let total = tree.total();
                let mut indices = Vec::with_capacity(batch_size);
                let mut raw = Vec::with_capacity(batch_size);
                for _ in 0..batch_size {
                    let slot = tree.find(rng.gen::<f64>() * total);
                    let mu = tree.get(slot) / total;
                    indices.push(slot);
                    raw.push((n as f64 * mu).powf(-beta));
                }
                let max_w = raw.iter().fold(0.0f64, |a, &b| a.max(b));
                let is_weights = raw.iter().map(|w| w / max_w).collect();
                (indices, is_weights)
            }
        };
        if self.strategy.uses_reliability() {
            let touched: BTreeSet<u32> = indices
                .iter()
                .map(|&s| self.storage[s].episode_id)
                .filter(|ep| self.stale_episodes.contains(ep))
                .collect();
            for ep in touched {
                self.refresh_episode(ep);
            }
        }
        Ok(SampledBatch { indices, is_weights })
    }

    /// Replace the stored `|delta|` of the given slots and refresh their
    /// priorities at the current annealing state. Affected episodes are
    /// marked stale for lazy reliability recomputation.
    pub fn update_td(&mut self, indices: &[usize], new_td_plus: &[f64]) -> Result<(), ReplayError> {
        assert_eq!(indices.len(), new_td_plus.len());
        for (&slot, &d) in indices.iter().zip(new_td_plus) {
            if slot >= self.storage.len() {
                return Err(ReplayError::IndexOutOfRange(slot));
            }
            if !d.is_finite() || d < 0.0 {
                return Err(ReplayError::BadPriority(d));
            }
        }
        let omega = self.omega_now();
        for (&slot, &d) in indices.iter().zip(new_td_plus) {
            self.td_plus[slot] = d;
            if let Some(tree) = &mut self.tree {
                let psi = single_priority(d, self.reliability[slot], omega, &self.spec)?;
                tree.set(slot, psi);
                self.max_priority = self.max_priority.max(psi);
            }
            if self.strategy.uses_reliability() {
                self.stale_episodes.insert(self.storage[slot].episode_id);
            }
        }
        Ok(())
    }

    /// Finish an episode: store its TD magnitudes, recompute reliability for
    /// every live transition of the episode and refresh tree priorities
    /// (no-op on priorities for uniform/HER/PER).
    pub fn on_episode_end(&mut self, episode: &Episode) -> Result<(), ReplayError> {
        if episode.is_empty() {
            return Err(ReplayError::EmptyEpisode);
        }
        let ep_id = episode.transitions[0].episode_id;
        if !self.episode_slots.contains_key(&ep_id) {
            return Err(ReplayError::UnknownEpisode(ep_id));
        }
        for (t, &d) in episode.transitions.iter().zip(&episode.td_plus) {
            if !d.is_finite() || d < 0.0 {
                return Err(ReplayError::BadPriority(d));
            }
            if let Some(&slot) = self
                .episode_slots
                .get(&ep_id)
                .and_then(|slots| slots.iter().find(|&&s| self.storage[s].step_in_episode == t.step_in_episode))
            {
                self.td_plus[slot] = d;
            }
        }
        if self.strategy.uses_reliability() {
            self.refresh_episode(ep_id);
        }
        Ok(())
    }

    /// Recompute reliability over the live (step-ordered) slots of an episode
    /// and refresh their priorities. Evicted prefixes drop out of the sums.
    fn refresh_episode(&mut self, ep_id: u32) {
        let Some(slots) = self.episode_slots.get(&ep_id).cloned() else {
            return;
        };
        let tds: Vec<f64> = slots.iter().map(|&s| self.td_plus[s]).collect();
        let scores = reliability_scores(&tds).expect("stored td_plus are validated on entry");
        let omega = self.omega_now();
        for (&slot, &r) in slots.iter().zip(&scores) {
            self.reliability[slot] = r;
            if let Some(tree) = &mut self.tree {
                let psi = single_priority(self.td_plus[slot], r, omega, &self.spec)
                    .expect("stored td_plus are validated on entry");
                tree.set(slot, psi);
                self.max_priority = self.max_priority.max(psi);
            }
        }
        self.stale_episodes.remove(&ep_id);
    }

    /// Warm-start a fresh buffer with this buffer's transitions, payloads
    /// copied unmodified in oldest-to-newest order. Priorities are reset to a
    /// uniform maximum so every transferred transition is sampled at least
    /// once before its first TD refresh; the frame counter restarts at 0.
    pub fn transfer(&self) -> ReplayBuffer {
        self.transfer_with(false)
    }

    /// As [`ReplayBuffer::transfer`], optionally carrying the source
    /// priorities over instead of resetting them.
    pub fn transfer_with(&self, keep_source_priorities: bool) -> ReplayBuffer {
        let mut target = ReplayBuffer::new(
            self.strategy,
            self.capacity,
            self.state_dim,
            self.action_count,
            self.env_id.clone(),
            self.spec,
            self.schedule,
        );
        for (i, slot) in self.slots_in_order().into_iter().enumerate() {
            target.insert(self.storage[slot].clone());
            if keep_source_priorities {
                target.td_plus[i] = self.td_plus[slot];
                target.reliability[i] = self.reliability[slot];
                if let (Some(tt), Some(st)) = (&mut target.tree, &self.tree) {
                    tt.set(i, st.get(slot));
                }
            }
        }
        target.frame_counter = 0;
        target
    }

    /// Unnormalized priority of a slot (`None` for non-prioritized strategies).
    pub fn priority_of(&self, slot: usize) -> Option<f64> {
        self.tree.as_ref().map(|t| t.get(slot))
    }

    /// Root of the priority tree (`None` for non-prioritized strategies).
    pub fn priority_total(&self) -> Option<f64> {
        self.tree.as_ref().map(|t| t.total())
    }

    #[cfg(test)]
    pub(crate) fn tree(&self) -> Option<&SumTree> {
        self.tree.as_ref()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn mk(strategy: Strategy, capacity: usize) -> ReplayBuffer {
        ReplayBuffer::new(strategy, capacity, 2, 3, "test-env", PrioritySpec::default(), None)
    }

    fn push_episode(buf: &mut ReplayBuffer, ep: u32, len: usize) -> Episode {
        let mut transitions = Vec::new();
        for step in 1..=len {
            let t = Transition::new(
                vec![ep as f32, step as f32],
                (step % 3) as u32,
                step as f32,
                vec![ep as f32, step as f32 + 1.0],
                step == len,
                ep,
                step as u32,
            );
            buf.insert(t.clone());
            transitions.push(t);
        }
        Episode::new(transitions)
    }

    #[test]
    fn fifo_eviction_keeps_newest() {
        let mut buf = mk(Strategy::Uniform, 4);
        for ep in 0..3u32 {
            push_episode(&mut buf, ep, 2);
        }
        assert_eq!(buf.len(), 4);
        let order: Vec<u32> = buf.iter_in_order().map(|t| t.episode_id).collect();
        assert_eq!(order, vec![1, 1, 2, 2]);
    }

    #[test]
    fn sample_errors() {
        let mut buf = mk(Strategy::Per, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(buf.sample(1, &mut rng), Err(ReplayError::Empty)));
        push_episode(&mut buf, 0, 2);
        assert!(matches!(buf.sample(3, &mut rng), Err(ReplayError::BatchTooLarge { .. })));
        assert!(buf.sample(2, &mut rng).is_ok());
    }

    #[test]
    fn proportional_sampling_frequencies() {
        let mut buf = mk(Strategy::Per, 4);
        let mut ep = Episode::new(Vec::new());
        for step in 1..=4u32 {
            let t = Transition::new(vec![0.0, 0.0], 0, 0.0, vec![0.0, 0.0], step == 4, 1, step);
            buf.insert(t.clone());
            ep.transitions.push(t);
        }
        // alpha = 1, eps = 0 so priorities are the raw td magnitudes
        buf.spec = PrioritySpec { alpha: 1.0, epsilon_priority: 0.0, ..Default::default() };
        buf.update_td(&[0, 1, 2, 3], &[1.0, 2.0, 3.0, 4.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut counts = [0usize; 4];
        let draws = 1_000_000;
        for _ in 0..draws / 4 {
            let batch = buf.sample(4, &mut rng).unwrap();
            for i in batch.indices {
                counts[i] += 1;
            }
        }
        let want = [0.1, 0.2, 0.3, 0.4];
        for (i, &c) in counts.iter().enumerate() {
            let freq = c as f64 / draws as f64;
            assert!((freq - want[i]).abs() < 0.005, "slot {i}: {freq} vs {}", want[i]);
        }
    }

    #[test]
    fn equal_priorities_sample_uniformly() {
        let mut buf = mk(Strategy::Per, 4);
        push_episode(&mut buf, 0, 4);
        buf.update_td(&[0, 1, 2, 3], &[2.0, 2.0, 2.0, 2.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut counts = [0usize; 4];
        for _ in 0..20_000 {
            let batch = buf.sample(4, &mut rng).unwrap();
            for i in batch.indices {
                counts[i] += 1;
            }
        }
        for &c in &counts {
            let freq = c as f64 / 80_000.0;
            assert!((freq - 0.25).abs() < 0.01, "{freq}");
        }
    }

    #[test]
    fn is_weights_bounds_and_uniform_case() {
        let mut buf = mk(Strategy::Per, 8);
        buf.spec = PrioritySpec { beta0: 1.0, ..Default::default() }; // beta = 1 throughout
        push_episode(&mut buf, 0, 8);
        buf.update_td(&[0, 1, 2, 3, 4, 5, 6, 7], &[1.0; 8]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let batch = buf.sample(8, &mut rng).unwrap();
        for &w in &batch.is_weights {
            assert!((w - 1.0).abs() < 1e-12, "uniform priorities at beta=1 give weight 1, got {w}");
        }
        // unequal priorities: weights in (0, 1], max exactly 1
        buf.update_td(&[0, 1], &[9.0, 0.1]).unwrap();
        let batch = buf.sample(8, &mut rng).unwrap();
        let max = batch.is_weights.iter().cloned().fold(0.0f64, f64::max);
        assert_eq!(max, 1.0);
        assert!(batch.is_weights.iter().all(|&w| w > 0.0 && w <= 1.0));
    }

    #[test]
    fn episode_end_reliability_refresh() {
        let mut buf = ReplayBuffer::new(
            Strategy::ReaPer,
            16,
            2,
            3,
            "test-env",
            PrioritySpec { alpha: 1.0, omega: 1.0, epsilon_priority: 0.0, ..Default::default() },
            None,
        );
        let mut ep = push_episode(&mut buf, 7, 4);
        ep.td_plus = vec![1.0, 1.0, 1.0, 1.0];
        buf.on_episode_end(&ep).unwrap();
        for (slot, want) in [(0, 0.25), (1, 0.5), (2, 0.75), (3, 1.0)] {
            assert!((buf.reliability[slot] - want).abs() < 1e-12);
            let tree = buf.tree().unwrap();
            assert!((tree.get(slot) - want * 1.0).abs() < 1e-12);
        }
        let tree = buf.tree().unwrap();
        let leaf_sum: f64 = (0..4).map(|s| tree.get(s)).sum();
        assert!((tree.total() - leaf_sum).abs() < 1e-9);
    }

    #[test]
    fn unknown_episode_is_an_error() {
        let mut buf = mk(Strategy::ReaPer, 8);
        push_episode(&mut buf, 1, 2);
        let ghost = Episode::new(vec![Transition::new(vec![0.0, 0.0], 0, 0.0, vec![0.0, 0.0], true, 99, 1)]);
        assert!(matches!(buf.on_episode_end(&ghost), Err(ReplayError::UnknownEpisode(99))));
    }

    #[test]
    fn update_td_guards() {
        let mut buf = mk(Strategy::Per, 8);
        push_episode(&mut buf, 0, 3);
        assert!(matches!(buf.update_td(&[5], &[1.0]), Err(ReplayError::IndexOutOfRange(5))));
        assert!(matches!(buf.update_td(&[0], &[-1.0]), Err(ReplayError::BadPriority(_))));
        assert!(buf.update_td(&[0], &[0.5]).is_ok());
    }

    #[test]
    fn updating_one_leaf_touches_only_its_root_path() {
        let mut buf = mk(Strategy::Per, 8);
        push_episode(&mut buf, 0, 8);
        buf.update_td(&(0..8).collect::<Vec<_>>(), &[1.0; 8]).unwrap();
        let before: Vec<f64> = (0..8).map(|s| buf.tree().unwrap().get(s)).collect();
        buf.update_td(&[3], &[7.0]).unwrap();
        let after: Vec<f64> = (0..8).map(|s| buf.tree().unwrap().get(s)).collect();
        for s in 0..8 {
            if s == 3 {
                assert!(after[s] > before[s]);
            } else {
                assert_eq!(after[s], before[s]);
            }
        }
        assert!(buf.tree().unwrap().consistency_error() < 1e-12);
    }

    #[test]
    fn capacity_eviction_is_exact() {
        let mut buf = mk(Strategy::Uniform, 8);
        for ep in 0..5u32 {
            push_episode(&mut buf, ep, 3); // 15 inserts into capacity 8
        }
        assert_eq!(buf.len(), 8);
        let steps: Vec<(u32, u32)> =
            buf.iter_in_order().map(|t| (t.episode_id, t.step_in_episode)).collect();
        // the 8 newest of 15: last of episode 2, all of 3 and 4
        assert_eq!(steps, vec![(2, 2), (2, 3), (3, 1), (3, 2), (3, 3), (4, 1), (4, 2), (4, 3)]);
    }

    #[test]
    fn transfer_copies_payloads_and_resets_priorities() {
        let mut buf = mk(Strategy::Per, 8);
        let ep = push_episode(&mut buf, 3, 4);
        buf.update_td(&[0, 1, 2, 3], &[0.1, 5.0, 0.2, 0.3]).unwrap();
        let _ = ep;
        let target = buf.transfer();
        assert_eq!(target.len(), buf.len());
        for (a, b) in buf.iter_in_order().zip(target.iter_in_order()) {
            assert_eq!(a, b);
        }
        assert_eq!(target.frame_counter(), 0);
        let tree = target.tree().unwrap();
        let first = tree.get(0);
        assert!((0..4).all(|s| (tree.get(s) - first).abs() < 1e-15), "uniform reset priorities");
        // keep-source-priorities variant preserves the tree leaves
        let kept = buf.transfer_with(true);
        for s in 0..4 {
            assert_eq!(kept.tree().unwrap().get(s), buf.tree().unwrap().get(s));
        }
    }

    #[test]
    fn empty_transfer_is_fine() {
        let buf = mk(Strategy::Uniform, 8);
        let target = buf.transfer();
        assert!(target.is_empty());
    }
}

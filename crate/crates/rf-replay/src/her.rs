use rand::Rng;

use crate::{Episode, ReplayError, Transition};

/// Environment-side hooks for hindsight relabeling. The environment knows how
/// to read the achieved goal out of a transition and how to rewrite a
/// transition's observations, reward and done flag under a substituted goal.
pub trait HerRelabeler {
    /// The goal actually achieved by this transition (the state reached after
    /// its action), encoded in goal space.
    fn achieved_goal(&self, t: &Transition) -> Vec<f32>;

    /// Recompute the transition under `goal`.
    fn relabel(&self, t: &Transition, goal: &[f32]) -> Relabeled;
}

/// Rewritten fields of a relabeled transition.
#[derive(Debug, Clone)]
pub struct Relabeled {
    pub state: Vec<f32>,
    pub next_state: Vec<f32>,
    pub reward: f32,
    pub done: bool,
}

/// "Future" hindsight relabeling: for each transition of the episode, sample
/// `k` goals from the achieved states at the same or later steps, then rewrite
/// reward, done and (goal-relative) observations. Returned copies carry fresh
/// episode ids drawn from `episode_id_counter`.
pub fn her_relabel<R: Rng>(
    episode: &Episode,
    k: usize,
    relabeler: &dyn HerRelabeler,
    rng: &mut R,
    episode_id_counter: &mut u32,
) -> Result<Vec<Transition>, ReplayError> {
    if episode.is_empty() {
        return Err(ReplayError::EmptyEpisode);
    }
    if episode.transitions.iter().any(|t| t.goal.is_none()) {
        return Err(ReplayError::MissingGoal);
    }
    let n = episode.len();
    let mut out = Vec::with_capacity(n * k);
    for t_idx in 0..n {
        for _ in 0..k {
            let j = rng.gen_range(t_idx..n);
            let goal = relabeler.achieved_goal(&episode.transitions[j]);
            let re = relabeler.relabel(&episode.transitions[t_idx], &goal);
            let id = *episode_id_counter;
            *episode_id_counter = episode_id_counter.wrapping_add(1);
            out.push(Transition {
                state: re.state,
                action: episode.transitions[t_idx].action,
                reward: re.reward,
                next_state: re.next_state,
                done: re.done,
                episode_id: id,
                step_in_episode: episode.transitions[t_idx].step_in_episode,
                goal: Some(goal),
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    /// Toy goal space: 1-d position. Achieved goal is the next state; reward
    /// is 0 on goal match (within 0.25), otherwise -1.
    struct LineRelabeler;

    impl HerRelabeler for LineRelabeler {
        fn achieved_goal(&self, t: &Transition) -> Vec<f32> {
            t.next_state.clone()
        }

        fn relabel(&self, t: &Transition, goal: &[f32]) -> Relabeled {
            let hit = (t.next_state[0] - goal[0]).abs() < 0.25;
            Relabeled {
                state: t.state.clone(),
                next_state: t.next_state.clone(),
                reward: if hit { 0.0 } else { -1.0 },
                done: hit,
            }
        }
    }

    fn goal_episode(len: usize) -> Episode {
        let transitions = (1..=len)
            .map(|s| {
                let mut t = Transition::new(
                    vec![s as f32 - 1.0],
                    0,
                    -1.0,
                    vec![s as f32],
                    s == len,
                    0,
                    s as u32,
                );
                t.goal = Some(vec![100.0]);
                t
            })
            .collect();
        Episode::new(transitions)
    }

    #[test]
    fn single_transition_self_goal_succeeds() {
        let ep = goal_episode(1);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        let mut ids = 1000;
        let out = her_relabel(&ep, 1, &LineRelabeler, &mut rng, &mut ids).unwrap();
        assert_eq!(out.len(), 1);
        assert!(out[0].done);
        assert_eq!(out[0].reward, 0.0);
        assert_eq!(out[0].goal.as_deref(), Some(&[1.0f32][..]));
    }

    #[test]
    fn k5_on_length_10_yields_at_most_50() {
        let ep = goal_episode(10);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let mut ids = 0;
        let out = her_relabel(&ep, 5, &LineRelabeler, &mut rng, &mut ids).unwrap();
        assert!(out.len() <= 50);
        assert_eq!(out.len(), 50);
        // goals always come from the future (or present) of the same episode
        for t in &out {
            let g = t.goal.as_ref().unwrap()[0];
            assert!(g >= t.state[0] + 1.0 - 1e-6);
        }
    }

    #[test]
    fn done_iff_goal_hit() {
        let ep = goal_episode(6);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let mut ids = 0;
        let out = her_relabel(&ep, 3, &LineRelabeler, &mut rng, &mut ids).unwrap();
        for t in &out {
            let hit = (t.next_state[0] - t.goal.as_ref().unwrap()[0]).abs() < 0.25;
            assert_eq!(t.done, hit);
            assert_eq!(t.reward, if hit { 0.0 } else { -1.0 });
        }
    }

    #[test]
    fn goalless_episode_is_rejected() {
        let ep = Episode::new(vec![Transition::new(vec![0.0], 0, 0.0, vec![1.0], true, 0, 1)]);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut ids = 0;
        assert!(matches!(
            her_relabel(&ep, 2, &LineRelabeler, &mut rng, &mut ids),
            Err(ReplayError::MissingGoal)
        ));
    }
}

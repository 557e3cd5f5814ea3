/// One stored experience record. States are kept as `f32` so the in-memory
/// representation round-trips bit-exactly through the binary file format.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Vec<f32>,
    pub action: u32,
    pub reward: f32,
    pub next_state: Vec<f32>,
    pub done: bool,
    pub episode_id: u32,
    pub step_in_episode: u32,
    /// Goal the episode was conditioned on (flattened), when the environment
    /// is goal-conditioned. Not part of the serialized record.
    pub goal: Option<Vec<f32>>,
}

impl Transition {
    pub fn new(
        state: Vec<f32>,
        action: u32,
        reward: f32,
        next_state: Vec<f32>,
        done: bool,
        episode_id: u32,
        step_in_episode: u32,
    ) -> Self {
        Self { state, action, reward, next_state, done, episode_id, step_in_episode, goal: None }
    }
}

/// A finished episode: ordered transitions plus their per-step `|delta|`.
#[derive(Debug, Clone)]
pub struct Episode {
    pub transitions: Vec<Transition>,
    pub td_plus: Vec<f64>,
}

impl Episode {
    pub fn new(transitions: Vec<Transition>) -> Self {
        let n = transitions.len();
        Self { transitions, td_plus: vec![0.0; n] }
    }

    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }
}

//! Value-network learner: a small fully-connected Q-network with hand-rolled
//! reverse-mode differentiation, Adam, epsilon-greedy action selection with
//! legality masking, n-step return accumulation, DQN/DDQN targets and
//! target-network synchronization.

mod adam;
mod config;
mod error;
mod learner;
mod network;
mod nstep;
mod policy;

pub use adam::AdamState;
pub use config::{AgentConfig, TargetSync};
pub use error::AgentError;
pub use learner::{compute_target, gradients, loss_only, train_step, LossKind, TrainBatch};
pub use network::{Activation, QNetwork};
pub use nstep::NStepAccumulator;
pub use policy::{select_action, EpsilonSchedule};

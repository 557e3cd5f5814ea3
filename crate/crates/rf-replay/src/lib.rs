//! Replay strategies for off-policy deep Q-learning: uniform, hindsight
//! relabeling (HER), TD-error prioritization (PER), reliability-adjusted
//! prioritization (ReaPER) and its annealed variant (ReaPER+), together with
//! the sum tree backing proportional sampling, buffer-to-buffer transfer and
//! a bit-exact binary serialization format.

mod buffer;
mod error;
mod formulas;
mod her;
mod serial;
mod spec;
mod sumtree;
mod transition;

pub use buffer::{ReplayBuffer, SampledBatch};
pub use error::ReplayError;
pub use formulas::{omega_at, priorities, reliability_scores, td_target};
pub use her::{her_relabel, HerRelabeler, Relabeled};
pub use serial::{
    deserialize, deserialize_for_env, read_header, serialize, BufferHeader, FORMAT_VERSION, MAGIC,
};
pub use spec::{OmegaSchedule, PrioritySpec, Strategy};
pub use sumtree::SumTree;
pub use transition::{Episode, Transition};

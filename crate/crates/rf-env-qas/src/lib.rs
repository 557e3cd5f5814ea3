//! Quantum architecture search environment: layered gate-placement tensor
//! state (binary encoding I for the CNOT gateset, integer-labeled encoding II
//! for the two-qubit-rotation gateset), curriculum moving threshold, amortized
//! quantum-classical evaluation and variational parameter optimization.

mod actions;
mod curriculum;
mod env;
mod error;
mod tensor;
mod vqe;

pub use actions::{enumerate_actions, ActionI, ActionII, QasAction};
pub use curriculum::{Curriculum, CurriculumConfig, EpisodeResult};
pub use env::{shaping_reward, update_indicator, QasConfig, QasEnv, QasEpisodeLog};
pub use error::QasError;
pub use tensor::{CircuitTensorState, EncodingKind, GateCounts};
pub use vqe::{optimize_parameters, CostEvaluator, VqeMethod, VqeOptimizerConfig};

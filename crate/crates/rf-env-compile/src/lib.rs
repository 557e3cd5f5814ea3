//! Gate-by-gate unitary compilation environment: the agent appends gates from
//! a discrete basis to drive the residual unitary toward the identity.

mod env;
mod evaluate;

pub use env::{zz_pi_target, CompileConfig, CompileEnv, Gateset, RewardMode, TargetSource};
pub use evaluate::{evaluate, write_eval_csv, EvalRow, Policy};

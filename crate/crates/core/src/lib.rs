//! Segmentation-driven reward learning for multi-stage tasks: an EPIC
//! pseudometric, a chained manipulation environment, a subtask-conditioned
//! reward model with its training objectives, iterative refinement on
//! suboptimal rollouts and a small actor-critic agent for downstream RL.

pub mod cli;
pub mod data;
pub mod env;
pub mod epic;
pub mod error;
pub mod model;
pub mod numerics;
pub mod rl;
pub mod train;

pub use error::{Error, Result};

//! PRM-guided Monte Carlo Tree Search over a collaborative decoding space.
//!
//! A private fine-tuned small model and a general large model jointly explore
//! reasoning paths step by step. Each tree expansion generates the next step
//! either from the tuned model alone or from the fused distribution
//! `softmax(z_general + z_tuned - z_base)`, and a process reward model scores
//! every new prefix to steer the search.

pub mod backends;
pub mod core;
pub mod engine;
pub mod error;
pub mod harness;
pub mod policy;
pub mod reward;

pub use crate::core::{
    ActionKind, ExpandStrategy, LogitVector, NodeId, Query, ReasoningStep, SearchConfig,
    SearchNode, SearchTree, TokenId, TraceEvent, Vocabulary,
};
pub use crate::engine::{run_search, ReasoningResult, SearchEngine};
pub use crate::error::{GBoostError, Result};
pub use crate::policy::{BackendTriple, GenerationBackend};
pub use crate::reward::{RewardModel, RewardScore};

//! Equilibrium computation and approximate best play.

mod backward;
mod belief;
mod bruteforce;
mod mcts;
pub mod randgen;

pub use backward::{solve_backward_induction, SolveOptions};
pub use belief::{update_belief, Belief, TypedMovePolicy};
pub use bruteforce::{
    complete_info_profile_count, solve_bruteforce, BruteforceOptions, BruteforceOutcome,
};
pub use mcts::{ismcts, mcts, ActionStat, MctsOptions, RootStats};

use crate::classifier::ClassifyError;
use crate::game::{ConversationState, GameError, Player, Utterance};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("exact solver requires complete information (singleton type sets)")]
    BayesianSpec,
    #[error("node budget of {0} exceeded")]
    NodeBudgetExceeded(u64),
    #[error("pure-strategy profile count {count} exceeds the cap {cap}")]
    ProfileCapExceeded { count: u128, cap: u128 },
    #[error("root state is terminal")]
    TerminalRoot,
    #[error("belief is degenerate: {0}")]
    DegenerateBelief(String),
    #[error("solver requires a deterministic classifier")]
    NondeterministicClassifier,
    #[error("invalid solver input: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
}

/// Root payoff for one realized type pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootValue {
    pub t_x: String,
    pub t_y: String,
    pub x: f64,
    pub y: f64,
}

/// Output of an exact solve: root values (one entry per type pair), the
/// policy at every decision point of the solved tree, and the node count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub root_values: Vec<RootValue>,
    /// Prior-weighted X value (equals the single root value when the game
    /// has complete information).
    pub expected_x_value: f64,
    pub policy: BTreeMap<String, Utterance>,
    pub node_count: u64,
}

impl SolveResult {
    /// (X value, Y value) of the unique type pair in a complete-information
    /// game.
    pub fn complete_info_values(&self) -> Option<(f64, f64)> {
        match self.root_values.as_slice() {
            [v] => Some((v.x, v.y)),
            _ => None,
        }
    }
}

/// Key identifying a decision point: mover, the mover's type, and the
/// serialized conversation (which includes the pending X move at Y nodes).
pub fn decision_key(mover: Player, mover_type: &str, state: &ConversationState) -> String {
    format!(
        "{mover}|{mover_type}|{}",
        state.serialize(crate::game::SerializeStyle::Delimiters)
    )
}

//! Engine for verdict games: two-player, multi-stage conversation games whose
//! outcome is decided by a non-strategic judge that reads the transcript after
//! every stage and emits a conclusive verdict or a decision to continue.
//!
//! The crate is organized around:
//! - [`game`]: the game formalism (states, specs, utilities, menus, payoffs)
//! - [`classifier`]: deterministic judges (automaton, keyword, constant)
//! - [`solver`]: backward induction, a brute-force equilibrium oracle, UCT
//!   MCTS and single-observer ISMCTS with Bayesian beliefs
//! - [`agent`]: naive, strategic (breadth/depth introspection), solver-backed
//!   and scripted policies
//! - [`llm`]: chat-completions bridge for free-text players and an LLM judge,
//!   with a deterministic mock backend
//! - [`harness`]: seeded match batches, arm summaries, significance tests and
//!   record persistence
//! - [`config`]: on-disk schemas for game specs and experiments

pub mod agent;
pub mod classifier;
pub mod config;
pub mod game;
pub mod harness;
pub mod llm;
pub mod solver;

pub use game::{
    ConversationState, GameSpec, Player, PlayerType, SerializeStyle, Stage, Token, Utterance,
    UtilityTable, Verdict,
};
pub use solver::Belief;

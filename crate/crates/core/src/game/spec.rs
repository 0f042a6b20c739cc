//! Game parametrization and the per-stage transition rules.

use super::{ConversationState, GameError, Player, Stage, Token, Utterance, Verdict};
use crate::classifier::ClassifierSpec;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

const PRIOR_TOL: f64 = 1e-12;

/// One row of a utility table: payoffs for `player` under each verdict, given
/// the realized type pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityRow {
    pub player: Player,
    pub t_x: String,
    pub t_y: String,
    pub zero: f64,
    pub one: f64,
    pub cont: f64,
}

/// Total map (player, t_X, t_Y, verdict) -> payoff.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UtilityTable {
    pub rows: Vec<UtilityRow>,
}

impl UtilityTable {
    pub fn new(rows: Vec<UtilityRow>) -> UtilityTable {
        UtilityTable { rows }
    }

    pub fn get(
        &self,
        player: Player,
        t_x: &str,
        t_y: &str,
        verdict: Verdict,
    ) -> Result<f64, GameError> {
        self.rows
            .iter()
            .find(|r| r.player == player && r.t_x == t_x && r.t_y == t_y)
            .map(|r| match verdict {
                Verdict::Zero => r.zero,
                Verdict::One => r.one,
                Verdict::Cont => r.cont,
            })
            .ok_or_else(|| GameError::MissingUtility {
                player,
                t_x: t_x.to_string(),
                t_y: t_y.to_string(),
                verdict,
            })
    }
}

/// One menu rule: applies when every present condition matches the context.
/// Rules are tried in order; the first match wins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MenuRule {
    /// Matches the mover's own type label.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub when_type: Option<String>,
    /// Matches the text of the X utterance the mover is replying to
    /// (meaningful for Y rules).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub when_last_x: Option<String>,
    /// Matches the zero-based index of the stage being played.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub when_stage: Option<usize>,
    pub moves: Vec<Utterance>,
}

impl MenuRule {
    pub fn unconditional(moves: Vec<Utterance>) -> MenuRule {
        MenuRule {
            when_type: None,
            when_last_x: None,
            when_stage: None,
            moves,
        }
    }

    fn matches(&self, mover_type: Option<&str>, last_x: Option<&str>, stage: usize) -> bool {
        self.when_type
            .as_deref()
            .map_or(true, |t| mover_type == Some(t))
            && self
                .when_last_x
                .as_deref()
                .map_or(true, |x| last_x == Some(x))
            && self.when_stage.map_or(true, |s| s == stage)
    }
}

/// Per-player action menus (the finite action abstraction).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MenuTable {
    #[serde(default)]
    pub x: Vec<MenuRule>,
    #[serde(default)]
    pub y: Vec<MenuRule>,
}

/// Full parametrization of a verdict game. An empty `alphabet` means the
/// alphabet is open (free-text play through the llm bridge); with a non-empty
/// alphabet every move token must be a member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameSpec {
    pub name: String,
    #[serde(default)]
    pub alphabet: BTreeSet<Token>,
    /// Per-move length cap `l`.
    pub max_utterance_len: usize,
    /// Stage cap `d`.
    pub max_stages: usize,
    pub x_types: Vec<String>,
    pub y_types: Vec<String>,
    /// Distribution over `y_types`, aligned by index.
    pub prior_y: Vec<f64>,
    /// Distribution over `x_types`; uniform if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior_x: Option<Vec<f64>>,
    pub utilities: UtilityTable,
    pub classifier_id: String,
    pub classifier: ClassifierSpec,
    #[serde(default)]
    pub menus: MenuTable,
    /// Seed text `s_0`.
    #[serde(default)]
    pub seed_text: Vec<Token>,
}

impl GameSpec {
    pub fn is_complete_information(&self) -> bool {
        self.x_types.len() == 1 && self.y_types.len() == 1
    }

    pub fn validate(&self) -> Result<(), GameError> {
        if self.max_stages == 0 {
            return Err(GameError::InvalidSpec("d must be >= 1".into()));
        }
        if self.max_utterance_len == 0 {
            return Err(GameError::InvalidSpec("l must be >= 1".into()));
        }
        if self.x_types.is_empty() || self.y_types.is_empty() {
            return Err(GameError::InvalidSpec("type sets must be non-empty".into()));
        }
        check_distribution(&self.prior_y, self.y_types.len(), "prior_y")?;
        if let Some(px) = &self.prior_x {
            check_distribution(px, self.x_types.len(), "prior_x")?;
        }
        for t_x in &self.x_types {
            for t_y in &self.y_types {
                for player in [Player::X, Player::Y] {
                    let v = self.utilities.get(player, t_x, t_y, Verdict::Cont)?;
                    if !v.is_finite() {
                        return Err(GameError::InvalidSpec("non-finite utility".into()));
                    }
                }
            }
        }
        for rule in self.menus.x.iter().chain(self.menus.y.iter()) {
            for mv in &rule.moves {
                self.check_utterance(mv)?;
            }
        }
        Ok(())
    }

    pub fn check_utterance(&self, u: &Utterance) -> Result<(), GameError> {
        if u.len() > self.max_utterance_len {
            return Err(GameError::OverLength(u.text(), self.max_utterance_len));
        }
        if !self.alphabet.is_empty() {
            for t in u.tokens() {
                if !self.alphabet.contains(t) {
                    return Err(GameError::UnknownToken(t.as_str().to_string()));
                }
            }
        }
        Ok(())
    }

    pub fn prior_of(&self, t_y: &str) -> Result<f64, GameError> {
        self.y_types
            .iter()
            .position(|t| t == t_y)
            .map(|i| self.prior_y[i])
            .ok_or_else(|| GameError::UnknownType(t_y.to_string()))
    }

    /// The configured menu for the mover in the current context.
    ///
    /// `mover_type` is consulted only by type-conditioned menu rules; pass
    /// `None` in complete-information games.
    pub fn legal_moves(
        &self,
        state: &ConversationState,
        mover: Player,
        mover_type: Option<&str>,
    ) -> Result<Vec<Utterance>, GameError> {
        if state.is_terminal(self) {
            return Err(GameError::GameOver);
        }
        let last_x = match (mover, &state.pending_x) {
            (Player::X, None) => None,
            (Player::X, Some(_)) => {
                return Err(GameError::OutOfTurn(
                    "X has already moved in the current stage".into(),
                ))
            }
            (Player::Y, Some(x)) => Some(x.text()),
            (Player::Y, None) => {
                return Err(GameError::OutOfTurn(
                    "Y cannot move before X in the current stage".into(),
                ))
            }
        };
        let rules = match mover {
            Player::X => &self.menus.x,
            Player::Y => &self.menus.y,
        };
        let stage = state.stage_count();
        rules
            .iter()
            .find(|r| r.matches(mover_type, last_x.as_deref(), stage))
            .filter(|r| !r.moves.is_empty())
            .map(|r| r.moves.clone())
            .ok_or(GameError::EmptyMenu { player: mover })
    }

    /// Append a completed stage and its verdict. The input state is untouched;
    /// a new state is returned. `verdict` must be the classifier's output on
    /// the serialized new state; the engine computes it in
    /// [`crate::classifier::play_stage`].
    pub fn apply_stage(
        &self,
        state: &ConversationState,
        x_move: Utterance,
        y_move: Utterance,
        verdict: Verdict,
    ) -> Result<ConversationState, GameError> {
        if state.is_terminal(self) {
            return Err(GameError::GameOver);
        }
        if let Some(pending) = &state.pending_x {
            if *pending != x_move {
                return Err(GameError::OutOfTurn(
                    "x_move differs from the pending X utterance".into(),
                ));
            }
        }
        self.check_utterance(&x_move)?;
        self.check_utterance(&y_move)?;
        let mut next = state.clone();
        next.pending_x = None;
        next.stages.push(Stage { x_move, y_move });
        next.verdict_history.push(verdict);
        Ok(next)
    }

    pub fn payoff(
        &self,
        player: Player,
        t_x: &str,
        t_y: &str,
        terminal_verdict: Verdict,
    ) -> Result<f64, GameError> {
        self.utilities.get(player, t_x, t_y, terminal_verdict)
    }

    /// The conclusive verdict this player prefers under the given type pair
    /// (ties resolve to `Zero`).
    pub fn desired_verdict(
        &self,
        player: Player,
        t_x: &str,
        t_y: &str,
    ) -> Result<Verdict, GameError> {
        let zero = self.payoff(player, t_x, t_y, Verdict::Zero)?;
        let one = self.payoff(player, t_x, t_y, Verdict::One)?;
        Ok(if one > zero { Verdict::One } else { Verdict::Zero })
    }
}

fn check_distribution(probs: &[f64], arity: usize, what: &str) -> Result<(), GameError> {
    if probs.len() != arity {
        return Err(GameError::InvalidSpec(format!(
            "{what} has {} entries for {arity} types",
            probs.len()
        )));
    }
    if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(GameError::InvalidSpec(format!(
            "{what} entries must lie in [0, 1]"
        )));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > PRIOR_TOL {
        return Err(GameError::InvalidSpec(format!(
            "{what} sums to {total}, not 1"
        )));
    }
    Ok(())
}

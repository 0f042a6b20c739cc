//! Exact backward induction for complete-information games. At each node the
//! mover maximizes their own continuation payoff (general-sum backward
//! induction; this is minimax on zero-sum games), with ties broken by menu
//! order.

use super::{decision_key, RootValue, SolveResult, SolverError};
use crate::classifier::{play_stage, Classifier};
use crate::game::{ConversationState, GameSpec, Player};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub node_budget: u64,
}

impl Default for SolveOptions {
    fn default() -> SolveOptions {
        SolveOptions {
            node_budget: 1_000_000,
        }
    }
}

struct Solve<'a> {
    spec: &'a GameSpec,
    classifier: &'a dyn Classifier,
    t_x: &'a str,
    t_y: &'a str,
    budget: u64,
    node_count: u64,
    policy: BTreeMap<String, crate::game::Utterance>,
}

pub fn solve_backward_induction(
    spec: &GameSpec,
    classifier: &dyn Classifier,
    opts: SolveOptions,
) -> Result<SolveResult, SolverError> {
    if !spec.is_complete_information() {
        return Err(SolverError::BayesianSpec);
    }
    if !classifier.is_deterministic() {
        return Err(SolverError::NondeterministicClassifier);
    }
    let mut solve = Solve {
        spec,
        classifier,
        t_x: &spec.x_types[0],
        t_y: &spec.y_types[0],
        budget: opts.node_budget,
        node_count: 0,
        policy: BTreeMap::new(),
    };
    let root = ConversationState::new(spec.seed_text.clone());
    let [x, y] = solve.value_x(&root)?;
    Ok(SolveResult {
        root_values: vec![RootValue {
            t_x: solve.t_x.to_string(),
            t_y: solve.t_y.to_string(),
            x,
            y,
        }],
        expected_x_value: x,
        policy: solve.policy,
        node_count: solve.node_count,
    })
}

impl Solve<'_> {
    fn bump(&mut self) -> Result<(), SolverError> {
        self.node_count += 1;
        if self.node_count > self.budget {
            return Err(SolverError::NodeBudgetExceeded(self.budget));
        }
        Ok(())
    }

    fn terminal_payoffs(&self, state: &ConversationState) -> Result<Option<[f64; 2]>, SolverError> {
        match state.terminal_verdict(self.spec) {
            Some(v) => Ok(Some([
                self.spec.payoff(Player::X, self.t_x, self.t_y, v)?,
                self.spec.payoff(Player::Y, self.t_x, self.t_y, v)?,
            ])),
            None => Ok(None),
        }
    }

    fn value_x(&mut self, state: &ConversationState) -> Result<[f64; 2], SolverError> {
        if let Some(p) = self.terminal_payoffs(state)? {
            return Ok(p);
        }
        self.bump()?;
        let moves = self.spec.legal_moves(state, Player::X, Some(self.t_x))?;
        let mut best: Option<([f64; 2], crate::game::Utterance)> = None;
        for mv in moves {
            let value = self.value_y(&state.with_pending_x(mv.clone())?)?;
            if best.as_ref().map_or(true, |(b, _)| value[0] > b[0]) {
                best = Some((value, mv));
            }
        }
        let (value, mv) = best.expect("menus are non-empty");
        self.policy
            .insert(decision_key(Player::X, self.t_x, state), mv);
        Ok(value)
    }

    fn value_y(&mut self, state: &ConversationState) -> Result<[f64; 2], SolverError> {
        self.bump()?;
        let pending = state.pending_x.clone().expect("Y node has a pending X move");
        let moves = self.spec.legal_moves(state, Player::Y, Some(self.t_y))?;
        let mut best: Option<([f64; 2], crate::game::Utterance)> = None;
        for mv in moves {
            let next = play_stage(self.spec, self.classifier, state, pending.clone(), mv.clone())?;
            let value = self.value_x(&next)?;
            if best.as_ref().map_or(true, |(b, _)| value[1] > b[1]) {
                best = Some((value, mv));
            }
        }
        let (value, mv) = best.expect("menus are non-empty");
        self.policy
            .insert(decision_key(Player::Y, self.t_y, state), mv);
        Ok(value)
    }
}

//! UCT Monte-Carlo tree search and its single-observer information-set
//! variant. Both run the same seeded search core; `ismcts` additionally
//! draws a determinization of Y's hidden type from the belief at the start
//! of each iteration, from a dedicated rng stream so that a point-mass
//! belief reproduces `mcts` exactly at equal seeds.

use super::{Belief, SolverError};
use crate::classifier::{play_stage, Classifier};
use crate::game::{ConversationState, GameSpec, Player, SerializeStyle, Utterance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::HashMap;

const DETERMINIZATION_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Debug, Clone, Copy)]
pub struct MctsOptions {
    pub iterations: u64,
    pub exploration_c: f64,
    pub seed: u64,
}

impl MctsOptions {
    pub fn new(iterations: u64, seed: u64) -> MctsOptions {
        MctsOptions {
            iterations,
            exploration_c: std::f64::consts::SQRT_2,
            seed,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ActionStat {
    pub action: Utterance,
    pub visits: u64,
    /// Mean backed-up value for the root mover.
    pub mean_value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RootStats {
    pub actions: Vec<ActionStat>,
    pub iterations: u64,
}

/// UCT search on a complete-information game. Returns the most-visited root
/// action (ties break toward menu order) and the root visit statistics.
pub fn mcts(
    spec: &GameSpec,
    classifier: &dyn Classifier,
    root: &ConversationState,
    opts: MctsOptions,
) -> Result<(Utterance, RootStats), SolverError> {
    if !spec.is_complete_information() {
        return Err(SolverError::BayesianSpec);
    }
    let belief = Belief::point_mass(spec.y_types.clone(), &spec.y_types[0])
        .expect("singleton type set");
    search(spec, classifier, root, &belief, opts, false)
}

/// Single-observer ISMCTS from X's perspective: Y's type is hidden behind
/// `belief`; each iteration determinizes it, Y nodes are keyed per type, and
/// X nodes aggregate statistics across determinizations.
pub fn ismcts(
    spec: &GameSpec,
    classifier: &dyn Classifier,
    root: &ConversationState,
    belief: &Belief,
    opts: MctsOptions,
) -> Result<(Utterance, RootStats), SolverError> {
    if root.pending_x.is_some() {
        return Err(SolverError::InvalidArgument(
            "ismcts observes from X's perspective; the root must be an X decision".into(),
        ));
    }
    if spec.x_types.len() != 1 {
        return Err(SolverError::InvalidArgument(
            "ismcts supports a single X type".into(),
        ));
    }
    for t in belief.types() {
        if !spec.y_types.contains(t) {
            return Err(SolverError::DegenerateBelief(format!(
                "belief type {t:?} is not in the game's Y type set"
            )));
        }
    }
    search(spec, classifier, root, belief, opts, true)
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct NodeKey {
    transcript: String,
    mover: Player,
    y_type: Option<String>,
}

struct Node {
    visits: u64,
    actions: Vec<Utterance>,
    action_visits: Vec<u64>,
    /// Summed backed-up payoffs per action, per player.
    action_values: Vec<[f64; 2]>,
}

fn search(
    spec: &GameSpec,
    classifier: &dyn Classifier,
    root: &ConversationState,
    belief: &Belief,
    opts: MctsOptions,
    determinize: bool,
) -> Result<(Utterance, RootStats), SolverError> {
    if opts.iterations == 0 {
        return Err(SolverError::InvalidArgument("iterations must be >= 1".into()));
    }
    if root.is_terminal(spec) {
        return Err(SolverError::TerminalRoot);
    }
    let t_x = spec.x_types[0].clone();
    let mut nodes: HashMap<NodeKey, Node> = HashMap::new();
    let mut search_rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut det_rng = ChaCha8Rng::seed_from_u64(opts.seed ^ DETERMINIZATION_STREAM);

    let root_mover = if root.pending_x.is_some() {
        Player::Y
    } else {
        Player::X
    };

    for _ in 0..opts.iterations {
        let t_y = if determinize {
            belief.sample(&mut det_rng).to_string()
        } else {
            spec.y_types[0].clone()
        };
        simulate(
            spec,
            classifier,
            root,
            &t_x,
            &t_y,
            opts.exploration_c,
            &mut nodes,
            &mut search_rng,
        )?;
    }

    let root_key = node_key(root, root_mover, if root_mover == Player::Y {
        Some(spec.y_types[0].clone())
    } else {
        None
    });
    let root_node = nodes
        .get(&root_key)
        .ok_or_else(|| SolverError::InvalidArgument("root was never expanded".into()))?;
    let mover_idx = player_index(root_mover);
    let best = (0..root_node.actions.len())
        .max_by_key(|&i| (root_node.action_visits[i], std::cmp::Reverse(i)))
        .expect("menus are non-empty");
    let stats = RootStats {
        actions: root_node
            .actions
            .iter()
            .enumerate()
            .map(|(i, a)| ActionStat {
                action: a.clone(),
                visits: root_node.action_visits[i],
                mean_value: if root_node.action_visits[i] > 0 {
                    root_node.action_values[i][mover_idx] / root_node.action_visits[i] as f64
                } else {
                    0.0
                },
            })
            .collect(),
        iterations: opts.iterations,
    };
    Ok((root_node.actions[best].clone(), stats))
}

fn player_index(p: Player) -> usize {
    match p {
        Player::X => 0,
        Player::Y => 1,
    }
}

fn node_key(state: &ConversationState, mover: Player, y_type: Option<String>) -> NodeKey {
    NodeKey {
        transcript: state.serialize(SerializeStyle::Delimiters),
        mover,
        y_type: if mover == Player::Y { y_type } else { None },
    }
}

fn advance(
    spec: &GameSpec,
    classifier: &dyn Classifier,
    state: &ConversationState,
    mover: Player,
    action: &Utterance,
) -> Result<ConversationState, SolverError> {
    Ok(match mover {
        Player::X => state.with_pending_x(action.clone())?,
        Player::Y => {
            let pending = state.pending_x.clone().expect("Y moves on a pending state");
            play_stage(spec, classifier, state, pending, action.clone())?
        }
    })
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    spec: &GameSpec,
    classifier: &dyn Classifier,
    root: &ConversationState,
    t_x: &str,
    t_y: &str,
    exploration_c: f64,
    nodes: &mut HashMap<NodeKey, Node>,
    rng: &mut ChaCha8Rng,
) -> Result<(), SolverError> {
    let mut state = root.clone();
    let mut path: Vec<(NodeKey, usize)> = Vec::new();
    let payoff = loop {
        if let Some(v) = state.terminal_verdict(spec) {
            break [
                spec.payoff(Player::X, t_x, t_y, v)?,
                spec.payoff(Player::Y, t_x, t_y, v)?,
            ];
        }
        let mover = if state.pending_x.is_some() {
            Player::Y
        } else {
            Player::X
        };
        let mover_type = match mover {
            Player::X => t_x,
            Player::Y => t_y,
        };
        let key = node_key(&state, mover, Some(t_y.to_string()));
        let node = match nodes.entry(key.clone()) {
            std::collections::hash_map::Entry::Occupied(e) => e.into_mut(),
            std::collections::hash_map::Entry::Vacant(e) => {
                let actions = spec.legal_moves(&state, mover, Some(mover_type))?;
                let n = actions.len();
                e.insert(Node {
                    visits: 0,
                    actions,
                    action_visits: vec![0; n],
                    action_values: vec![[0.0; 2]; n],
                })
            }
        };
        // expansion: first untried action in menu order
        if let Some(idx) = node.action_visits.iter().position(|&v| v == 0) {
            let action = node.actions[idx].clone();
            path.push((key, idx));
            state = advance(spec, classifier, &state, mover, &action)?;
            break rollout(spec, classifier, &state, t_x, t_y, rng)?;
        }
        // selection: UCB1 over the mover's own mean value
        let m = player_index(mover);
        let ln_n = (node.visits.max(1) as f64).ln();
        let mut best = 0usize;
        let mut best_score = f64::NEG_INFINITY;
        for i in 0..node.actions.len() {
            let visits = node.action_visits[i] as f64;
            let score = node.action_values[i][m] / visits
                + exploration_c * (ln_n / visits).sqrt();
            if score > best_score {
                best_score = score;
                best = i;
            }
        }
        let action = node.actions[best].clone();
        path.push((key, best));
        state = advance(spec, classifier, &state, mover, &action)?;
    };
    for (key, idx) in path {
        let node = nodes.get_mut(&key).expect("path nodes exist");
        node.visits += 1;
        node.action_visits[idx] += 1;
        node.action_values[idx][0] += payoff[0];
        node.action_values[idx][1] += payoff[1];
    }
    Ok(())
}

/// Uniform-random playout to a terminal state.
fn rollout(
    spec: &GameSpec,
    classifier: &dyn Classifier,
    from: &ConversationState,
    t_x: &str,
    t_y: &str,
    rng: &mut ChaCha8Rng,
) -> Result<[f64; 2], SolverError> {
    let mut state = from.clone();
    loop {
        if let Some(v) = state.terminal_verdict(spec) {
            return Ok([
                spec.payoff(Player::X, t_x, t_y, v)?,
                spec.payoff(Player::Y, t_x, t_y, v)?,
            ]);
        }
        let mover = if state.pending_x.is_some() {
            Player::Y
        } else {
            Player::X
        };
        let mover_type = match mover {
            Player::X => t_x,
            Player::Y => t_y,
        };
        let moves = spec.legal_moves(&state, mover, Some(mover_type))?;
        let pick = rng.gen_range(0..moves.len());
        state = advance(spec, classifier, &state, mover, &moves[pick])?;
    }
}

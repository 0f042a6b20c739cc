//! Brute-force equilibrium search by enumeration of pure strategy profiles.
//!
//! This is the verification oracle for the exact solvers: it shares no code
//! with backward induction. Complete-information specs are checked for
//! subgame perfection via one-shot deviations at every node; Bayesian specs
//! (hidden Y type, singleton X type) are checked for a pure-strategy perfect
//! Bayesian equilibrium with Bayes-consistent beliefs and the prior as the
//! declared off-path belief.

use super::{decision_key, RootValue, SolveResult, SolverError};
use crate::classifier::{play_stage, Classifier};
use crate::game::{ConversationState, GameSpec, Player, Utterance, Verdict};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy)]
pub struct BruteforceOptions {
    pub profile_cap: u128,
}

impl Default for BruteforceOptions {
    fn default() -> BruteforceOptions {
        BruteforceOptions {
            profile_cap: 1_000_000,
        }
    }
}

#[derive(Debug)]
pub enum BruteforceOutcome {
    Equilibrium(SolveResult),
    /// Bayesian search exhausted every pure profile without finding a PBE.
    NoPurePbe,
}

impl BruteforceOutcome {
    pub fn equilibrium(&self) -> Option<&SolveResult> {
        match self {
            BruteforceOutcome::Equilibrium(r) => Some(r),
            BruteforceOutcome::NoPurePbe => None,
        }
    }
}

pub fn solve_bruteforce(
    spec: &GameSpec,
    classifier: &dyn Classifier,
    opts: BruteforceOptions,
) -> Result<BruteforceOutcome, SolverError> {
    if !classifier.is_deterministic() {
        return Err(SolverError::NondeterministicClassifier);
    }
    if spec.is_complete_information() {
        complete_info(spec, classifier, opts).map(BruteforceOutcome::Equilibrium)
    } else {
        if spec.x_types.len() != 1 {
            return Err(SolverError::InvalidArgument(
                "brute-force PBE search supports a single X type".into(),
            ));
        }
        bayesian(spec, classifier, opts)
    }
}

// ---------------------------------------------------------------------------
// Complete information: subgame-perfect profile search.
// ---------------------------------------------------------------------------

enum Child {
    Terminal([f64; 2]),
    Node(usize),
}

struct CiNode {
    key: String,
    mover: Player,
    depth: usize,
    actions: Vec<Utterance>,
    children: Vec<Child>,
}

struct CiTree {
    nodes: Vec<CiNode>,
}

fn build_ci_tree(spec: &GameSpec, classifier: &dyn Classifier) -> Result<CiTree, SolverError> {
    let t_x = &spec.x_types[0];
    let t_y = &spec.y_types[0];
    let mut tree = CiTree { nodes: Vec::new() };
    let root = ConversationState::new(spec.seed_text.clone());
    if root.is_terminal(spec) {
        return Err(SolverError::TerminalRoot);
    }
    build_ci_x(spec, classifier, t_x, t_y, &root, 0, &mut tree)?;
    Ok(tree)
}

fn build_ci_x(
    spec: &GameSpec,
    classifier: &dyn Classifier,
    t_x: &str,
    t_y: &str,
    state: &ConversationState,
    depth: usize,
    tree: &mut CiTree,
) -> Result<usize, SolverError> {
    let actions = spec.legal_moves(state, Player::X, Some(t_x))?;
    let id = tree.nodes.len();
    tree.nodes.push(CiNode {
        key: decision_key(Player::X, t_x, state),
        mover: Player::X,
        depth,
        actions: actions.clone(),
        children: Vec::new(),
    });
    let mut children = Vec::with_capacity(actions.len());
    for mv in actions {
        let pending = state.with_pending_x(mv)?;
        let child = build_ci_y(spec, classifier, t_x, t_y, &pending, depth + 1, tree)?;
        children.push(Child::Node(child));
    }
    tree.nodes[id].children = children;
    Ok(id)
}

fn build_ci_y(
    spec: &GameSpec,
    classifier: &dyn Classifier,
    t_x: &str,
    t_y: &str,
    state: &ConversationState,
    depth: usize,
    tree: &mut CiTree,
) -> Result<usize, SolverError> {
    let pending = state.pending_x.clone().expect("Y node has a pending X move");
    let actions = spec.legal_moves(state, Player::Y, Some(t_y))?;
    let id = tree.nodes.len();
    tree.nodes.push(CiNode {
        key: decision_key(Player::Y, t_y, state),
        mover: Player::Y,
        depth,
        actions: actions.clone(),
        children: Vec::new(),
    });
    let mut children = Vec::with_capacity(actions.len());
    for mv in actions {
        let next = play_stage(spec, classifier, state, pending.clone(), mv)?;
        let child = match next.terminal_verdict(spec) {
            Some(v) => Child::Terminal([
                spec.payoff(Player::X, t_x, t_y, v)?,
                spec.payoff(Player::Y, t_x, t_y, v)?,
            ]),
            None => Child::Node(build_ci_x(spec, classifier, t_x, t_y, &next, depth + 1, tree)?),
        };
        children.push(child);
    }
    tree.nodes[id].children = children;
    Ok(id)
}

fn profile_count(action_counts: &[usize], cap: u128) -> Result<u128, SolverError> {
    let mut count: u128 = 1;
    for &n in action_counts {
        count = count.saturating_mul(n as u128);
        if count > cap {
            return Err(SolverError::ProfileCapExceeded { count, cap });
        }
    }
    Ok(count)
}

/// Number of pure strategy profiles of a complete-information spec (used to
/// size instances before handing them to the oracle). Saturates at u128::MAX.
pub fn complete_info_profile_count(
    spec: &GameSpec,
    classifier: &dyn Classifier,
) -> Result<u128, SolverError> {
    let tree = build_ci_tree(spec, classifier)?;
    let counts: Vec<usize> = tree.nodes.iter().map(|n| n.actions.len()).collect();
    profile_count(&counts, u128::MAX)
}

fn complete_info(
    spec: &GameSpec,
    classifier: &dyn Classifier,
    opts: BruteforceOptions,
) -> Result<SolveResult, SolverError> {
    let tree = build_ci_tree(spec, classifier)?;
    let n = tree.nodes.len();
    // Deep nodes vary slowest in the odometer, so the first passing profile
    // picks the lowest menu index among optimal actions bottom-up.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (usize::MAX - tree.nodes[i].depth, i));
    let counts: Vec<usize> = tree.nodes.iter().map(|node| node.actions.len()).collect();
    profile_count(&counts, opts.profile_cap)?;

    let mut choice = vec![0usize; n];
    let mut values = vec![[0.0f64; 2]; n];
    loop {
        // values, children first
        for &i in &order {
            let node = &tree.nodes[i];
            values[i] = match node.children[choice[i]] {
                Child::Terminal(p) => p,
                Child::Node(c) => values[c],
            };
        }
        // one-shot deviation check at every node
        let mut perfect = true;
        'nodes: for (i, node) in tree.nodes.iter().enumerate() {
            let m = match node.mover {
                Player::X => 0,
                Player::Y => 1,
            };
            let current = values[i][m];
            for (a, child) in node.children.iter().enumerate() {
                if a == choice[i] {
                    continue;
                }
                let alt = match *child {
                    Child::Terminal(p) => p[m],
                    Child::Node(c) => values[c][m],
                };
                if alt > current {
                    perfect = false;
                    break 'nodes;
                }
            }
        }
        if perfect {
            let policy: BTreeMap<String, Utterance> = tree
                .nodes
                .iter()
                .enumerate()
                .map(|(i, node)| (node.key.clone(), node.actions[choice[i]].clone()))
                .collect();
            let root = values[0];
            return Ok(SolveResult {
                root_values: vec![RootValue {
                    t_x: spec.x_types[0].clone(),
                    t_y: spec.y_types[0].clone(),
                    x: root[0],
                    y: root[1],
                }],
                expected_x_value: root[0],
                policy,
                node_count: n as u64,
            });
        }
        // advance the odometer (last coordinate in `order` fastest)
        let mut pos = n;
        loop {
            if pos == 0 {
                // exhausted; a finite perfect-information game always has an
                // SPE, so exhaustion means the deviation check is broken
                return Err(SolverError::InvalidArgument(
                    "profile enumeration exhausted without finding an SPE".into(),
                ));
            }
            pos -= 1;
            let i = order[pos];
            choice[i] += 1;
            if choice[i] < counts[i] {
                break;
            }
            choice[i] = 0;
        }
    }
}

// ---------------------------------------------------------------------------
// Bayesian: pure-strategy PBE search with Bayes-consistent beliefs.
// ---------------------------------------------------------------------------

/// Child of a Y decision: the successor transcript is public even though the
/// decision itself is type-conditioned.
enum PublicChild {
    Terminal(Verdict),
    XNode(usize),
}

struct BxNode {
    state: ConversationState,
    depth: usize,
    actions: Vec<Utterance>,
    /// Per action: index into `y_groups`.
    groups: Vec<usize>,
}

/// The Y decision nodes reached by one (X node, X action) pair: one per type.
struct ByNode {
    key: String,
    type_index: usize,
    actions: Vec<Utterance>,
    children: Vec<PublicChild>,
}

struct BTree2 {
    x_nodes: Vec<BxNode>,
    /// y_groups[g][type_index] -> index into y_nodes
    y_groups: Vec<Vec<usize>>,
    y_nodes: Vec<ByNode>,
}

fn build_bayes_tree(spec: &GameSpec, classifier: &dyn Classifier) -> Result<BTree2, SolverError> {
    let root = ConversationState::new(spec.seed_text.clone());
    if root.is_terminal(spec) {
        return Err(SolverError::TerminalRoot);
    }
    let mut tree = BTree2 {
        x_nodes: Vec::new(),
        y_groups: Vec::new(),
        y_nodes: Vec::new(),
    };
    build_bayes_x(spec, classifier, &root, 0, &mut tree)?;
    Ok(tree)
}

fn build_bayes_x(
    spec: &GameSpec,
    classifier: &dyn Classifier,
    state: &ConversationState,
    depth: usize,
    tree: &mut BTree2,
) -> Result<usize, SolverError> {
    let t_x = &spec.x_types[0];
    let actions = spec.legal_moves(state, Player::X, Some(t_x))?;
    let id = tree.x_nodes.len();
    tree.x_nodes.push(BxNode {
        state: state.clone(),
        depth,
        actions: actions.clone(),
        groups: Vec::new(),
    });
    let mut groups = Vec::with_capacity(actions.len());
    for mv in actions {
        let pending = state.with_pending_x(mv)?;
        let mut group = Vec::with_capacity(spec.y_types.len());
        for (type_index, t_y) in spec.y_types.iter().enumerate() {
            let y_actions = spec.legal_moves(&pending, Player::Y, Some(t_y))?;
            let mut children = Vec::with_capacity(y_actions.len());
            for y_mv in &y_actions {
                let next = play_stage(
                    spec,
                    classifier,
                    &pending,
                    pending.pending_x.clone().unwrap(),
                    y_mv.clone(),
                )?;
                let child = match next.terminal_verdict(spec) {
                    Some(v) => PublicChild::Terminal(v),
                    None => PublicChild::XNode(build_bayes_x(
                        spec, classifier, &next, depth + 1, tree,
                    )?),
                };
                children.push(child);
            }
            let y_id = tree.y_nodes.len();
            tree.y_nodes.push(ByNode {
                key: decision_key(Player::Y, t_y, &pending),
                type_index,
                actions: y_actions,
                children,
            });
            group.push(y_id);
        }
        let g = tree.y_groups.len();
        tree.y_groups.push(group);
        groups.push(g);
    }
    tree.x_nodes[id].groups = groups;
    Ok(id)
}

/// Successor transcripts of distinct Y replies can coincide only if the
/// replies coincide, so observing the transcript pins down the reply; the
/// consistency check below therefore compares chosen action indices.
fn bayesian(
    spec: &GameSpec,
    classifier: &dyn Classifier,
    opts: BruteforceOptions,
) -> Result<BruteforceOutcome, SolverError> {
    let tree = build_bayes_tree(spec, classifier)?;
    let t_x = spec.x_types[0].clone();
    let n_types = spec.y_types.len();
    let nx = tree.x_nodes.len();
    let ny = tree.y_nodes.len();

    // decision variables: X choices then Y choices
    let counts: Vec<usize> = tree
        .x_nodes
        .iter()
        .map(|x| x.actions.len())
        .chain(tree.y_nodes.iter().map(|y| y.actions.len()))
        .collect();
    profile_count(&counts, opts.profile_cap)?;

    let mut x_order: Vec<usize> = (0..nx).collect();
    x_order.sort_by_key(|&i| (usize::MAX - tree.x_nodes[i].depth, i));

    let mut choice = vec![0usize; nx + ny];
    // per-type values at X nodes: value[(t, i)] = [x payoff, y payoff]
    let mut values = vec![[0.0f64; 2]; n_types * nx];

    // value of committing to X action `a` at node `i` when Y is of type `t`
    // and both then follow the profile
    let value_after = |tree: &BTree2,
                       values: &[[f64; 2]],
                       choice: &[usize],
                       t: usize,
                       i: usize,
                       a: usize|
     -> Result<[f64; 2], SolverError> {
        let y_id = tree.y_groups[tree.x_nodes[i].groups[a]][t];
        let y_node = &tree.y_nodes[y_id];
        let y_choice = choice[nx + y_id];
        match y_node.children[y_choice] {
            PublicChild::Terminal(v) => Ok([
                spec.payoff(Player::X, &t_x, &spec.y_types[t], v)?,
                spec.payoff(Player::Y, &t_x, &spec.y_types[t], v)?,
            ]),
            PublicChild::XNode(j) => Ok(values[t * nx + j]),
        }
    };

    loop {
        // per-type values bottom-up
        for &i in &x_order {
            for t in 0..n_types {
                values[t * nx + i] = value_after(&tree, &values, &choice, t, i, choice[i])?;
            }
        }

        // Y sequential rationality at every type-conditioned node
        let mut ok = true;
        'y_nodes: for (y_id, y_node) in tree.y_nodes.iter().enumerate() {
            let t = y_node.type_index;
            let eval = |c: usize| -> Result<f64, SolverError> {
                match y_node.children[c] {
                    PublicChild::Terminal(v) => {
                        Ok(spec.payoff(Player::Y, &t_x, &spec.y_types[t], v)?)
                    }
                    PublicChild::XNode(j) => Ok(values[t * nx + j][1]),
                }
            };
            let current = eval(choice[nx + y_id])?;
            for c in 0..y_node.actions.len() {
                if c != choice[nx + y_id] && eval(c)? > current {
                    ok = false;
                    break 'y_nodes;
                }
            }
        }

        // Bayes-consistent beliefs: a type is consistent with an X node iff
        // its strategy reproduces every observed Y reply on the path.
        let mut consistent = vec![true; n_types * nx];
        if ok {
            for &i in x_order.iter().rev() {
                // parents precede children in x_order reversed (shallow first)
                let node = &tree.x_nodes[i];
                for &g in &node.groups {
                    for (t, &y_id) in tree.y_groups[g].iter().enumerate() {
                        let y_node = &tree.y_nodes[y_id];
                        let chosen = choice[nx + y_id];
                        for (c, child) in y_node.children.iter().enumerate() {
                            if let PublicChild::XNode(j) = child {
                                consistent[t * nx + *j] = consistent[t * nx + i] && c == chosen;
                            }
                        }
                    }
                }
            }

            // X sequential rationality under the belief at each node
            'x_nodes: for (i, node) in tree.x_nodes.iter().enumerate() {
                let mut belief: Vec<f64> = (0..n_types)
                    .map(|t| {
                        if consistent[t * nx + i] {
                            spec.prior_y[t]
                        } else {
                            0.0
                        }
                    })
                    .collect();
                let mass: f64 = belief.iter().sum();
                if mass <= 0.0 {
                    belief = spec.prior_y.clone(); // declared off-path rule
                } else {
                    for b in &mut belief {
                        *b /= mass;
                    }
                }
                let expected = |a: usize| -> Result<f64, SolverError> {
                    let mut acc = 0.0;
                    for (t, b) in belief.iter().enumerate() {
                        if *b > 0.0 {
                            acc += b * value_after(&tree, &values, &choice, t, i, a)?[0];
                        }
                    }
                    Ok(acc)
                };
                let current = expected(choice[i])?;
                for a in 0..node.actions.len() {
                    if a != choice[i] && expected(a)? > current {
                        ok = false;
                        break 'x_nodes;
                    }
                }
            }
        }

        if ok {
            let mut policy = BTreeMap::new();
            for (i, node) in tree.x_nodes.iter().enumerate() {
                policy.insert(
                    decision_key(Player::X, &t_x, &node.state),
                    node.actions[choice[i]].clone(),
                );
            }
            for (y_id, y_node) in tree.y_nodes.iter().enumerate() {
                policy.insert(y_node.key.clone(), y_node.actions[choice[nx + y_id]].clone());
            }
            let root_values: Vec<RootValue> = (0..n_types)
                .map(|t| RootValue {
                    t_x: t_x.clone(),
                    t_y: spec.y_types[t].clone(),
                    x: values[t * nx][0],
                    y: values[t * nx][1],
                })
                .collect();
            let expected_x_value = root_values
                .iter()
                .enumerate()
                .map(|(t, rv)| spec.prior_y[t] * rv.x)
                .sum();
            return Ok(BruteforceOutcome::Equilibrium(SolveResult {
                root_values,
                expected_x_value,
                policy,
                node_count: (nx + ny) as u64,
            }));
        }

        // advance the odometer: Y choices fastest, then shallow X nodes
        let mut pos = nx + ny;
        let order_at = |p: usize| if p < nx { x_order[p] } else { p };
        loop {
            if pos == 0 {
                return Ok(BruteforceOutcome::NoPurePbe);
            }
            pos -= 1;
            let i = order_at(pos);
            choice[i] += 1;
            if choice[i] < counts[i] {
                break;
            }
            choice[i] = 0;
        }
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::classifier::{resolve_classifier, ClassifierSpec, Speaker, TransitionRule};
    use crate::game::{builtin_game, utt, BuiltinGame, MenuRule, Token};
    use crate::solver::{solve_backward_induction, SolveOptions};

    #[test]
    fn constant_cont_court_value_is_strategy_irrelevant() {
        let mut spec = builtin_game(BuiltinGame::Court);
        spec.max_stages = 2;
        spec.menus.x = vec![MenuRule::unconditional(vec![utt(["q1"]), utt(["q2"])])];
        spec.menus.y = vec![MenuRule::unconditional(vec![utt(["a1"]), utt(["a2"])])];
        let classifier = resolve_classifier(&ClassifierSpec::Constant {
            verdict: Verdict::Cont,
        })
        .unwrap();
        let outcome =
            solve_bruteforce(&spec, classifier.as_ref(), BruteforceOptions::default()).unwrap();
        let result = outcome.equilibrium().unwrap();
        assert_eq!(result.complete_info_values(), Some((-1.0, 1.0)));
    }

    #[test]
    fn agrees_with_backward_induction_on_d1() {
        let tok = |s: &str| Token::new(s).unwrap();
        let mut spec = builtin_game(BuiltinGame::Court);
        spec.max_stages = 1;
        spec.menus.x = vec![MenuRule::unconditional(vec![utt(["q1"]), utt(["q2"])])];
        spec.menus.y = vec![MenuRule::unconditional(vec![utt(["a1"]), utt(["a2"])])];
        let classifier = resolve_classifier(&ClassifierSpec::Automaton {
            start: 0,
            defaults: vec![0, 0, 2],
            outputs: vec![Verdict::Cont, Verdict::Cont, Verdict::One],
            transitions: vec![
                TransitionRule {
                    from: 0,
                    speaker: Speaker::X,
                    token: tok("q2"),
                    to: 1,
                },
                TransitionRule {
                    from: 1,
                    speaker: Speaker::Y,
                    token: tok("a1"),
                    to: 2,
                },
            ],
        })
        .unwrap();
        let bi =
            solve_backward_induction(&spec, classifier.as_ref(), SolveOptions::default()).unwrap();
        let bf = solve_bruteforce(&spec, classifier.as_ref(), BruteforceOptions::default())
            .unwrap();
        let bf = bf.equilibrium().unwrap();
        assert_eq!(bi.root_values, bf.root_values);
        assert_eq!(bi.policy, bf.policy);
    }

    #[test]
    fn profile_cap_is_enforced() {
        let mut spec = builtin_game(BuiltinGame::Court);
        spec.max_stages = 2;
        spec.menus.x = vec![MenuRule::unconditional(vec![utt(["q1"]), utt(["q2"])])];
        spec.menus.y = vec![MenuRule::unconditional(vec![utt(["a1"]), utt(["a2"])])];
        let classifier = resolve_classifier(&ClassifierSpec::Constant {
            verdict: Verdict::Cont,
        })
        .unwrap();
        let result = solve_bruteforce(
            &spec,
            classifier.as_ref(),
            BruteforceOptions { profile_cap: 4 },
        );
        assert!(matches!(result, Err(SolverError::ProfileCapExceeded { .. })));
    }

    /// Interrogation with a "slip" probe: only the Guilty type's menu offers
    /// the incriminating token, and the classifier convicts exactly on it.
    /// In equilibrium the guilty suspect avoids the slip, the verdict is
    /// Zero either way, and X's expected value is prior-weighted:
    /// 0.5 * u_X(Guilty, Zero) + 0.5 * u_X(Non-Guilty, Zero) = 0.
    #[test]
    fn slip_game_has_the_expected_pure_pbe() {
        let spec = slip_game();
        let classifier = resolve_classifier(&spec.classifier).unwrap();
        let outcome =
            solve_bruteforce(&spec, classifier.as_ref(), BruteforceOptions::default()).unwrap();
        let result = outcome.equilibrium().expect("pure PBE exists");
        assert!((result.expected_x_value - 0.0).abs() < 1e-12);
        for rv in &result.root_values {
            // both types get exonerated (verdict Zero): Y payoff 1
            assert_eq!(rv.y, 1.0);
        }
        // Guilty Y avoids "slip" everywhere
        for (key, mv) in &result.policy {
            if key.starts_with("Y|Guilty|") {
                assert_ne!(mv, &utt(["slip"]), "at {key}");
            }
        }
    }

    pub(crate) fn slip_game() -> GameSpec {
        let tok = |s: &str| Token::new(s).unwrap();
        let mut spec = builtin_game(BuiltinGame::Interrogation);
        spec.max_stages = 1;
        // classifier outputs Zero unless Y says "slip"
        spec.classifier = ClassifierSpec::Automaton {
            start: 0,
            defaults: vec![0, 1],
            outputs: vec![Verdict::Zero, Verdict::One],
            transitions: vec![TransitionRule {
                from: 0,
                speaker: Speaker::Y,
                token: tok("slip"),
                to: 1,
            }],
        };
        spec.menus.x = vec![MenuRule::unconditional(vec![utt(["probe"])])];
        spec.menus.y = vec![
            MenuRule {
                when_type: Some("Guilty".into()),
                when_last_x: None,
                when_stage: None,
                moves: vec![utt(["slip"]), utt(["deny"])],
            },
            MenuRule::unconditional(vec![utt(["deny"])]),
        ];
        spec
    }
}

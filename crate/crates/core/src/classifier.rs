//! Non-strategic judges. A classifier is a pure function from the
//! conversation to a verdict. Classifiers consume structured (speaker, token)
//! events rather than raw bytes, so their output does not depend on the
//! serialization style.

use crate::game::{ConversationState, GameError, GameSpec, Token, Utterance, Verdict};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("classify requires at least one completed stage")]
    EmptyConversation,
    #[error("invalid classifier: {0}")]
    InvalidClassifier(String),
    #[error("external judge failed: {0}")]
    External(String),
    #[error(transparent)]
    Game(#[from] GameError),
}

/// Who emitted a token: the seed text, X, or Y.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Speaker {
    Seed,
    X,
    Y,
}

pub trait Classifier: Send + Sync {
    /// Verdict on a state with at least one completed stage. Pure function of
    /// the conversation content for deterministic classifiers.
    fn classify(&self, state: &ConversationState) -> Result<Verdict, ClassifyError>;

    /// False for external judges whose replies may vary between calls.
    fn is_deterministic(&self) -> bool {
        true
    }
}

fn require_stage(state: &ConversationState) -> Result<(), ClassifyError> {
    if state.stages.is_empty() {
        Err(ClassifyError::EmptyConversation)
    } else {
        Ok(())
    }
}

/// (speaker, token) event stream over completed stages. A pending X move is
/// not part of any completed stage and is not emitted.
fn token_events(state: &ConversationState) -> impl Iterator<Item = (Speaker, &Token)> {
    state
        .seed
        .iter()
        .map(|t| (Speaker::Seed, t))
        .chain(state.stages.iter().flat_map(|stage| {
            stage
                .x_move
                .tokens()
                .iter()
                .map(|t| (Speaker::X, t))
                .chain(stage.y_move.tokens().iter().map(|t| (Speaker::Y, t)))
        }))
}

/// Always returns the same verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantClassifier(pub Verdict);

impl Classifier for ConstantClassifier {
    fn classify(&self, state: &ConversationState) -> Result<Verdict, ClassifyError> {
        require_stage(state)?;
        Ok(self.0)
    }
}

/// Deterministic finite automaton over (speaker, token) events. Explicit
/// transitions are consulted first; a per-state default keeps the transition
/// function total over any alphabet. The verdict is the output of the state
/// reached after the last completed stage.
#[derive(Debug, Clone, PartialEq)]
pub struct AutomatonClassifier {
    start: usize,
    defaults: Vec<usize>,
    outputs: Vec<Verdict>,
    transitions: BTreeMap<(usize, Speaker, Token), usize>,
}

impl AutomatonClassifier {
    pub fn new(
        start: usize,
        defaults: Vec<usize>,
        outputs: Vec<Verdict>,
        transitions: BTreeMap<(usize, Speaker, Token), usize>,
    ) -> Result<AutomatonClassifier, ClassifyError> {
        let n = outputs.len();
        if n == 0 {
            return Err(ClassifyError::InvalidClassifier("no states".into()));
        }
        if defaults.len() != n {
            return Err(ClassifyError::InvalidClassifier(
                "one default transition per state required".into(),
            ));
        }
        let bad = |s: usize| s >= n;
        if bad(start)
            || defaults.iter().any(|&s| bad(s))
            || transitions.iter().any(|(&(from, _, _), &to)| bad(from) || bad(to))
        {
            return Err(ClassifyError::InvalidClassifier(
                "state index out of range".into(),
            ));
        }
        Ok(AutomatonClassifier {
            start,
            defaults,
            outputs,
            transitions,
        })
    }

    fn step(&self, state: usize, speaker: Speaker, token: &Token) -> usize {
        self.transitions
            .get(&(state, speaker, token.clone()))
            .copied()
            .unwrap_or(self.defaults[state])
    }

    fn run(&self, state: &ConversationState) -> usize {
        token_events(state).fold(self.start, |s, (speaker, token)| self.step(s, speaker, token))
    }
}

impl Classifier for AutomatonClassifier {
    fn classify(&self, state: &ConversationState) -> Result<Verdict, ClassifyError> {
        require_stage(state)?;
        Ok(self.outputs[self.run(state)])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TriggerPrecedence {
    #[default]
    GuiltyFirst,
    InnocentFirst,
}

/// Trigger-token judge: any guilty trigger in the conversation yields `One`,
/// any innocent trigger yields `Zero`, otherwise `Cont`. Precedence decides
/// when both kinds are present.
#[derive(Debug, Clone, PartialEq)]
pub struct KeywordClassifier {
    pub guilty_triggers: BTreeSet<Token>,
    pub innocent_triggers: BTreeSet<Token>,
    pub precedence: TriggerPrecedence,
}

impl Classifier for KeywordClassifier {
    fn classify(&self, state: &ConversationState) -> Result<Verdict, ClassifyError> {
        require_stage(state)?;
        let mut guilty = false;
        let mut innocent = false;
        for (_, token) in token_events(state) {
            guilty |= self.guilty_triggers.contains(token);
            innocent |= self.innocent_triggers.contains(token);
        }
        Ok(match (guilty, innocent, self.precedence) {
            (true, _, TriggerPrecedence::GuiltyFirst) | (true, false, _) => Verdict::One,
            (_, true, TriggerPrecedence::InnocentFirst) | (false, true, _) => Verdict::Zero,
            (false, false, _) => Verdict::Cont,
        })
    }
}

/// Serializable transition rule for the automaton config form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionRule {
    pub from: usize,
    pub speaker: Speaker,
    pub token: Token,
    pub to: usize,
}

/// On-disk classifier description; resolved to a concrete classifier by
/// [`resolve_classifier`]. The `llm` kind needs a chat backend and is built
/// in the llm module instead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassifierSpec {
    Constant {
        verdict: Verdict,
    },
    Automaton {
        start: usize,
        defaults: Vec<usize>,
        outputs: Vec<Verdict>,
        #[serde(default)]
        transitions: Vec<TransitionRule>,
    },
    Keyword {
        #[serde(default)]
        guilty_triggers: Vec<Token>,
        #[serde(default)]
        innocent_triggers: Vec<Token>,
        #[serde(default)]
        precedence: TriggerPrecedence,
    },
    /// External judge; see [`crate::llm`]. `judge_fixtures` points at the
    /// prompt fixture directory.
    Llm {
        model_id: String,
        judge_fixtures: String,
    },
}

impl ClassifierSpec {
    pub fn is_deterministic_kind(&self) -> bool {
        !matches!(self, ClassifierSpec::Llm { .. })
    }
}

/// Build a deterministic classifier from its spec. The `llm` kind is rejected
/// here: it requires a backend (see `llm::build_llm_judge`).
pub fn resolve_classifier(spec: &ClassifierSpec) -> Result<Box<dyn Classifier>, ClassifyError> {
    match spec {
        ClassifierSpec::Constant { verdict } => Ok(Box::new(ConstantClassifier(*verdict))),
        ClassifierSpec::Automaton {
            start,
            defaults,
            outputs,
            transitions,
        } => {
            let map = transitions
                .iter()
                .map(|r| ((r.from, r.speaker, r.token.clone()), r.to))
                .collect();
            Ok(Box::new(AutomatonClassifier::new(
                *start,
                defaults.clone(),
                outputs.clone(),
                map,
            )?))
        }
        ClassifierSpec::Keyword {
            guilty_triggers,
            innocent_triggers,
            precedence,
        } => Ok(Box::new(KeywordClassifier {
            guilty_triggers: guilty_triggers.iter().cloned().collect(),
            innocent_triggers: innocent_triggers.iter().cloned().collect(),
            precedence: *precedence,
        })),
        ClassifierSpec::Llm { .. } => Err(ClassifyError::InvalidClassifier(
            "llm judge needs a chat backend; build it via the llm module".into(),
        )),
    }
}

/// Verdict after each stage prefix. The last element equals
/// `classify(state)`.
pub fn classify_prefixes(
    classifier: &dyn Classifier,
    state: &ConversationState,
) -> Result<Vec<Verdict>, ClassifyError> {
    require_stage(state)?;
    let mut prefix = ConversationState::new(state.seed.clone());
    let mut verdicts = Vec::with_capacity(state.stages.len());
    for stage in &state.stages {
        prefix.stages.push(stage.clone());
        prefix.verdict_history.push(Verdict::Cont);
        let v = classifier.classify(&prefix)?;
        *prefix.verdict_history.last_mut().unwrap() = v;
        verdicts.push(v);
    }
    Ok(verdicts)
}

/// Play one full stage: append the two moves, ask the classifier for the
/// verdict on the new conversation, and record it.
pub fn play_stage(
    spec: &GameSpec,
    classifier: &dyn Classifier,
    state: &ConversationState,
    x_move: Utterance,
    y_move: Utterance,
) -> Result<ConversationState, ClassifyError> {
    let mut next = spec.apply_stage(state, x_move, y_move, Verdict::Cont)?;
    let verdict = classifier.classify(&next)?;
    *next.verdict_history.last_mut().unwrap() = verdict;
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{builtin_game, utt, BuiltinGame, MenuRule};

    fn state_of(pairs: &[(&str, &str)]) -> ConversationState {
        let mut s = ConversationState::empty();
        for (x, y) in pairs {
            s.stages.push(crate::game::Stage {
                x_move: Utterance::parse(x).unwrap(),
                y_move: Utterance::parse(y).unwrap(),
            });
            s.verdict_history.push(Verdict::Cont);
        }
        s
    }

    /// 2-state automaton: emits One once Y has said "confess".
    fn confess_automaton() -> AutomatonClassifier {
        let mut transitions = BTreeMap::new();
        transitions.insert((0, Speaker::Y, Token::new("confess").unwrap()), 1);
        AutomatonClassifier::new(
            0,
            vec![0, 1],
            vec![Verdict::Cont, Verdict::One],
            transitions,
        )
        .unwrap()
    }

    #[test]
    fn constant_classifier_is_constant() {
        let c = ConstantClassifier(Verdict::Cont);
        assert_eq!(c.classify(&state_of(&[("a", "b")])).unwrap(), Verdict::Cont);
        assert_eq!(
            c.classify(&state_of(&[("a", "b"), ("c", "d")])).unwrap(),
            Verdict::Cont
        );
    }

    #[test]
    fn empty_state_is_a_precondition_error() {
        let c = ConstantClassifier(Verdict::Cont);
        assert!(matches!(
            c.classify(&ConversationState::empty()),
            Err(ClassifyError::EmptyConversation)
        ));
    }

    #[test]
    fn confess_automaton_fires_on_y_token() {
        let c = confess_automaton();
        assert_eq!(c.classify(&state_of(&[("q", "confess")])).unwrap(), Verdict::One);
        assert_eq!(c.classify(&state_of(&[("q", "deny")])).unwrap(), Verdict::Cont);
        // speaker matters: X saying "confess" does not fire
        assert_eq!(c.classify(&state_of(&[("confess", "deny")])).unwrap(), Verdict::Cont);
    }

    #[test]
    fn keyword_classifier_matches_triggers() {
        let c = KeywordClassifier {
            guilty_triggers: [Token::new("vague").unwrap()].into(),
            innocent_triggers: [Token::new("alibi").unwrap()].into(),
            precedence: TriggerPrecedence::GuiltyFirst,
        };
        assert_eq!(
            c.classify(&state_of(&[("seen", "something vague")])).unwrap(),
            Verdict::One
        );
        assert_eq!(
            c.classify(&state_of(&[("seen", "my alibi")])).unwrap(),
            Verdict::Zero
        );
        assert_eq!(
            c.classify(&state_of(&[("seen", "no comment")])).unwrap(),
            Verdict::Cont
        );
        assert_eq!(
            c.classify(&state_of(&[("seen", "vague alibi")])).unwrap(),
            Verdict::One
        );
        let innocent_first = KeywordClassifier {
            precedence: TriggerPrecedence::InnocentFirst,
            ..c
        };
        assert_eq!(
            innocent_first
                .classify(&state_of(&[("seen", "vague alibi")]))
                .unwrap(),
            Verdict::Zero
        );
    }

    #[test]
    fn prefixes_track_each_stage() {
        let c = confess_automaton();
        let s = state_of(&[("q1", "deny"), ("q2", "deny"), ("q3", "confess")]);
        assert_eq!(
            classify_prefixes(&c, &s).unwrap(),
            vec![Verdict::Cont, Verdict::Cont, Verdict::One]
        );
        let single = state_of(&[("q", "deny")]);
        assert_eq!(
            classify_prefixes(&c, &single).unwrap(),
            vec![c.classify(&single).unwrap()]
        );
        let constant = ConstantClassifier(Verdict::Cont);
        assert_eq!(
            classify_prefixes(&constant, &s).unwrap(),
            vec![Verdict::Cont; 3]
        );
    }

    #[test]
    fn verdict_invariant_under_serialization_style() {
        use crate::game::{parse_transcript, SerializeStyle};
        let c = confess_automaton();
        let s = state_of(&[("q1 q2", "i confess")]);
        for style in [SerializeStyle::Delimiters, SerializeStyle::SpeakerLabels] {
            let round =
                parse_transcript(&s.serialize(style), style).unwrap();
            let rebuilt = round.into_state(vec![Verdict::Cont]).unwrap();
            assert_eq!(c.classify(&rebuilt).unwrap(), c.classify(&s).unwrap());
        }
    }

    #[test]
    fn play_stage_records_classifier_verdict() {
        let mut spec = builtin_game(BuiltinGame::Court);
        spec.menus.x = vec![MenuRule::unconditional(vec![utt(["q"])])];
        spec.menus.y = vec![MenuRule::unconditional(vec![utt(["confess"]), utt(["deny"])])];
        let c = confess_automaton();
        let s = play_stage(
            &spec,
            &c,
            &ConversationState::empty(),
            utt(["q"]),
            utt(["confess"]),
        )
        .unwrap();
        assert_eq!(s.verdict_history, vec![Verdict::One]);
        assert!(s.is_terminal(&spec));
    }

    #[test]
    fn classifier_spec_resolution() {
        let spec = ClassifierSpec::Keyword {
            guilty_triggers: vec![Token::new("vague").unwrap()],
            innocent_triggers: vec![],
            precedence: TriggerPrecedence::GuiltyFirst,
        };
        let c = resolve_classifier(&spec).unwrap();
        assert_eq!(
            c.classify(&state_of(&[("q", "vague")])).unwrap(),
            Verdict::One
        );
        let llm = ClassifierSpec::Llm {
            model_id: "m".into(),
            judge_fixtures: "fixtures".into(),
        };
        assert!(resolve_classifier(&llm).is_err());
    }
}

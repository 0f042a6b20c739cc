//! Seeded match batches, experiment arms and outcome summaries.

pub mod persist;
pub mod stats;

use crate::agent::{build_agent, Agent, AgentConfig, AgentError, MoveContext};
use crate::classifier::{play_stage, Classifier, ClassifyError};
use crate::game::{GameError, GameSpec, Player, Token, Utterance, Verdict};
use crate::llm::{AuditLog, CallRecord};
use crate::classifier::ClassifierSpec;
use crate::solver::Belief;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::time::Instant;
use thiserror::Error;

pub const RECORD_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid experiment: {0}")]
    InvalidExperiment(String),
    #[error("record io failed: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed record at line {line}: {message}")]
    MalformedRecord { line: usize, message: String },
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordedStage {
    pub x: Utterance,
    pub y: Utterance,
    pub verdict: Verdict,
}

/// Full account of one match. Equality and serialization ignore wall time so
/// replayed records compare bit-for-bit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatchRecord {
    pub record_version: u32,
    pub config_digest: String,
    /// Experiment arm this match belongs to; empty for standalone matches.
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub arm: String,
    pub seed: u64,
    pub agent_x: String,
    pub agent_y: String,
    pub t_x: String,
    pub t_y: String,
    /// Seed text `s_0`, kept so verdicts replay from the record alone.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub seed_text: Vec<Token>,
    pub stages: Vec<RecordedStage>,
    pub terminal_verdict: Verdict,
    /// The conclusive verdict X's realized type plays for; a win in
    /// summaries.
    pub desired_x_verdict: Verdict,
    pub payoff_x: f64,
    pub payoff_y: f64,
    /// True when the classifier or an agent may vary between runs.
    pub nondeterministic: bool,
    /// Embedded when the classifier is deterministic, enabling standalone
    /// verdict replay from the record alone.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classifier: Option<ClassifierSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub audit: Vec<CallRecord>,
    /// Populated when the match aborted; failed matches are excluded from
    /// summaries.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failed: Option<String>,
    #[serde(skip)]
    pub wall_time_ms: u64,
}

impl PartialEq for MatchRecord {
    fn eq(&self, other: &MatchRecord) -> bool {
        self.record_version == other.record_version
            && self.config_digest == other.config_digest
            && self.arm == other.arm
            && self.seed == other.seed
            && self.agent_x == other.agent_x
            && self.agent_y == other.agent_y
            && self.t_x == other.t_x
            && self.t_y == other.t_y
            && self.seed_text == other.seed_text
            && self.stages == other.stages
            && self.terminal_verdict == other.terminal_verdict
            && self.desired_x_verdict == other.desired_x_verdict
            && self.payoff_x == other.payoff_x
            && self.payoff_y == other.payoff_y
            && self.nondeterministic == other.nondeterministic
            && self.classifier == other.classifier
            && self.audit == other.audit
            && self.failed == other.failed
    }
}

/// Run one match with pre-built agents. Type realization draws two values
/// (t_x, then t_y) from a rng seeded with the match seed; the same seed
/// therefore realizes the same types in every arm.
#[allow(clippy::too_many_arguments)]
pub fn run_match_with(
    spec: &GameSpec,
    classifier: &dyn Classifier,
    agent_x: &mut dyn Agent,
    agent_y: &mut dyn Agent,
    seed: u64,
    config_digest: &str,
    audit: Option<&AuditLog>,
) -> MatchRecord {
    let started = Instant::now();
    let mut type_rng = ChaCha8Rng::seed_from_u64(seed);
    let prior_x_probs = spec.prior_x.clone().unwrap_or_else(|| {
        vec![1.0 / spec.x_types.len() as f64; spec.x_types.len()]
    });
    let prior_x =
        Belief::new(spec.x_types.clone(), prior_x_probs).expect("validated spec prior");
    let prior_y = Belief::from_prior(spec).expect("validated spec prior");
    let t_x = prior_x.sample(&mut type_rng).to_string();
    let t_y = prior_y.sample(&mut type_rng).to_string();

    let nondeterministic = !classifier.is_deterministic()
        || !agent_x.is_deterministic()
        || !agent_y.is_deterministic();
    let mut record = MatchRecord {
        record_version: RECORD_VERSION,
        config_digest: config_digest.to_string(),
        arm: String::new(),
        seed,
        agent_x: agent_x.id().to_string(),
        agent_y: agent_y.id().to_string(),
        t_x: t_x.clone(),
        t_y: t_y.clone(),
        seed_text: spec.seed_text.clone(),
        stages: Vec::new(),
        terminal_verdict: Verdict::Cont,
        desired_x_verdict: spec
            .desired_verdict(Player::X, &t_x, &t_y)
            .unwrap_or(Verdict::One),
        payoff_x: 0.0,
        payoff_y: 0.0,
        nondeterministic,
        classifier: if classifier.is_deterministic() && spec.classifier.is_deterministic_kind() {
            Some(spec.classifier.clone())
        } else {
            None
        },
        audit: Vec::new(),
        failed: None,
        wall_time_ms: 0,
    };

    // opponent types are common knowledge only in complete-information games,
    // except that Y always observes X's type (X moves first and has a public
    // role in every built-in game)
    let belief = prior_y;
    let result = (|| -> Result<(), HarnessError> {
        let mut state = crate::game::ConversationState::new(spec.seed_text.clone());
        while !state.is_terminal(spec) {
            let x_ctx = MoveContext {
                spec,
                classifier,
                state: &state,
                mover: Player::X,
                mover_type: &t_x,
                opponent_type: if spec.y_types.len() == 1 {
                    Some(&t_y)
                } else {
                    None
                },
                belief: &belief,
            };
            let x_move = agent_x.choose(&x_ctx)?;
            let pending = state.with_pending_x(x_move.clone())?;
            let y_ctx = MoveContext {
                spec,
                classifier,
                state: &pending,
                mover: Player::Y,
                mover_type: &t_y,
                opponent_type: Some(&t_x),
                belief: &belief,
            };
            let y_move = agent_y.choose(&y_ctx)?;
            state = play_stage(spec, classifier, &pending, x_move.clone(), y_move.clone())?;
            record.stages.push(RecordedStage {
                x: x_move,
                y: y_move,
                verdict: *state.verdict_history.last().unwrap(),
            });
        }
        record.terminal_verdict = state.terminal_verdict(spec).unwrap_or(Verdict::Cont);
        record.payoff_x = spec.payoff(Player::X, &t_x, &t_y, record.terminal_verdict)?;
        record.payoff_y = spec.payoff(Player::Y, &t_x, &t_y, record.terminal_verdict)?;
        Ok(())
    })();
    if let Err(e) = result {
        record.failed = Some(e.to_string());
    }
    if let Some(audit) = audit {
        record.audit = audit.snapshot();
    }
    record.wall_time_ms = started.elapsed().as_millis() as u64;
    record
}

/// Run one match with agents built fresh from their configs (the replayable
/// path: record is a pure function of spec, configs and seed).
pub fn run_match(
    spec: &GameSpec,
    classifier: &dyn Classifier,
    agent_x_cfg: &AgentConfig,
    agent_y_cfg: &AgentConfig,
    seed: u64,
    config_digest: &str,
) -> Result<MatchRecord, HarnessError> {
    let mut agent_x = build_agent(agent_x_cfg, Player::X, seed, None)?;
    let mut agent_y = build_agent(agent_y_cfg, Player::Y, seed, None)?;
    Ok(run_match_with(
        spec,
        classifier,
        agent_x.as_mut(),
        agent_y.as_mut(),
        seed,
        config_digest,
        None,
    ))
}

/// Replay a record's verdicts through its embedded classifier and check the
/// payoffs. Only meaningful for deterministic records.
pub fn verify_record(spec: &GameSpec, record: &MatchRecord) -> Result<(), HarnessError> {
    let classifier_spec = record.classifier.as_ref().ok_or_else(|| {
        HarnessError::InvalidExperiment("record has no embedded classifier".into())
    })?;
    let classifier = crate::classifier::resolve_classifier(classifier_spec)?;
    let mut state = crate::game::ConversationState::new(spec.seed_text.clone());
    for (i, stage) in record.stages.iter().enumerate() {
        let pending = state.with_pending_x(stage.x.clone())?;
        state = play_stage(
            spec,
            classifier.as_ref(),
            &pending,
            stage.x.clone(),
            stage.y.clone(),
        )?;
        let got = *state.verdict_history.last().unwrap();
        if got != stage.verdict {
            return Err(HarnessError::InvalidExperiment(format!(
                "stage {i}: recorded verdict {:?}, replayed {got:?}",
                stage.verdict
            )));
        }
    }
    let terminal = state.terminal_verdict(spec).unwrap_or(Verdict::Cont);
    if terminal != record.terminal_verdict
        || spec.payoff(Player::X, &record.t_x, &record.t_y, terminal)? != record.payoff_x
        || spec.payoff(Player::Y, &record.t_x, &record.t_y, terminal)? != record.payoff_y
    {
        return Err(HarnessError::InvalidExperiment(
            "terminal verdict or payoffs do not replay".into(),
        ));
    }
    Ok(())
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentArm {
    pub name: String,
    pub agent_x: AgentConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub agent_y: AgentConfig,
    pub arms: Vec<ExperimentArm>,
    pub n_matches: u64,
    pub base_seed: u64,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.n_matches == 0 {
            return Err(HarnessError::InvalidExperiment("n_matches must be >= 1".into()));
        }
        if self.arms.is_empty() {
            return Err(HarnessError::InvalidExperiment("at least one arm".into()));
        }
        let mut names: Vec<&str> = self.arms.iter().map(|a| a.name.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        if names.len() != self.arms.len() {
            return Err(HarnessError::InvalidExperiment("arm names must be unique".into()));
        }
        Ok(())
    }
}

/// Outcome counts for one arm, from X's perspective: a win is the verdict
/// X's realized type plays for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmSummary {
    pub name: String,
    pub wins: u64,
    pub losses: u64,
    pub non_conclusive: u64,
    pub excluded: u64,
    /// Matches counted: n_matches minus excluded.
    pub n: u64,
    pub win_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmResult {
    pub summary: ArmSummary,
    pub records: Vec<MatchRecord>,
}

pub fn summarize_arm(name: &str, records: &[MatchRecord]) -> ArmSummary {
    let mut summary = ArmSummary {
        name: name.to_string(),
        wins: 0,
        losses: 0,
        non_conclusive: 0,
        excluded: 0,
        n: 0,
        win_rate: 0.0,
    };
    for record in records {
        if record.failed.is_some() {
            summary.excluded += 1;
            continue;
        }
        summary.n += 1;
        if record.terminal_verdict == Verdict::Cont {
            summary.non_conclusive += 1;
        } else if record.terminal_verdict == record.desired_x_verdict {
            summary.wins += 1;
        } else {
            summary.losses += 1;
        }
    }
    if summary.n > 0 {
        summary.win_rate = summary.wins as f64 / summary.n as f64;
    }
    summary
}

/// Re-run the recorded verdicts through the embedded classifier, using only
/// what the record carries. Records without an embedded classifier pass
/// trivially (nothing to check).
pub fn replay_verdicts(record: &MatchRecord) -> Result<(), HarnessError> {
    let Some(classifier_spec) = &record.classifier else {
        return Ok(());
    };
    let classifier = crate::classifier::resolve_classifier(classifier_spec)?;
    let mut state = crate::game::ConversationState::new(record.seed_text.clone());
    for (i, stage) in record.stages.iter().enumerate() {
        state.stages.push(crate::game::Stage {
            x_move: stage.x.clone(),
            y_move: stage.y.clone(),
        });
        state.verdict_history.push(Verdict::Cont);
        let got = classifier.classify(&state)?;
        *state.verdict_history.last_mut().unwrap() = got;
        if got != stage.verdict {
            return Err(HarnessError::InvalidExperiment(format!(
                "stage {i}: recorded verdict {:?}, replayed {got:?}",
                stage.verdict
            )));
        }
    }
    Ok(())
}

/// Run every arm with identical per-index seeds (`base_seed + index`), so
/// arms differ only in the X agent.
pub fn run_experiment(
    spec: &GameSpec,
    classifier: &dyn Classifier,
    experiment: &ExperimentSpec,
    config_digest: &str,
) -> Result<Vec<ArmResult>, HarnessError> {
    experiment.validate()?;
    let mut results = Vec::with_capacity(experiment.arms.len());
    for arm in &experiment.arms {
        let mut records = Vec::with_capacity(experiment.n_matches as usize);
        for index in 0..experiment.n_matches {
            let seed = experiment.base_seed.wrapping_add(index);
            let mut record = run_match(
                spec,
                classifier,
                &arm.agent_x,
                &experiment.agent_y,
                seed,
                config_digest,
            )?;
            record.arm = arm.name.clone();
            records.push(record);
        }
        let summary = summarize_arm(&arm.name, &records);
        results.push(ArmResult { summary, records });
    }
    Ok(results)
}

//! Playable policies: naive sampling, strategic breadth/depth introspection,
//! solver-backed play and scripted replay. Every agent is a deterministic
//! function of (context, config, seed).

use crate::classifier::{play_stage, Classifier, ClassifyError};
use crate::game::{ConversationState, GameError, GameSpec, Player, Utterance, Verdict};
use crate::solver::{
    decision_key, ismcts, mcts, solve_backward_induction, Belief, MctsOptions, SolveOptions,
    SolverError,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("no legal moves available")]
    NoMoves,
    #[error("script exhausted after {0} moves")]
    ScriptExhausted(usize),
    #[error("invalid agent config: {0}")]
    InvalidConfig(String),
    #[error("free-text move generation failed: {0}")]
    Generator(String),
    #[error("decision point not covered by the solved policy: {0}")]
    PolicyMiss(String),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    Naive,
    Strategic,
    Solver,
    Scripted,
    Human,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverEngine {
    Exact,
    Mcts,
    Ismcts,
}

fn default_breadth() -> usize {
    10
}
fn default_depth() -> usize {
    1
}
fn default_rollouts() -> usize {
    1
}
fn default_iterations() -> u64 {
    1_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentConfig {
    pub kind: AgentKind,
    /// Candidate moves sampled/enumerated by the strategic agent.
    #[serde(default = "default_breadth")]
    pub breadth: usize,
    /// Lookahead in full stages (the candidate's own stage counts).
    #[serde(default = "default_depth")]
    pub depth: usize,
    #[serde(default = "default_rollouts")]
    pub rollouts_per_candidate: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// The conclusive verdict this agent plays for; derived from the utility
    /// table when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub desired_verdict: Option<Verdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub engine: Option<SolverEngine>,
    #[serde(default = "default_iterations")]
    pub iterations: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exploration_c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub script: Option<Vec<Utterance>>,
    /// Persona prompt fixture for free-text play through the llm bridge.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub persona_fixture: Option<String>,
    /// Persona used to stand in for moves the strategic agent does not
    /// control during free-text introspection.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation_persona_fixture: Option<String>,
}

impl AgentConfig {
    pub fn of_kind(kind: AgentKind) -> AgentConfig {
        AgentConfig {
            kind,
            breadth: default_breadth(),
            depth: default_depth(),
            rollouts_per_candidate: default_rollouts(),
            seed: None,
            desired_verdict: None,
            engine: None,
            iterations: default_iterations(),
            exploration_c: None,
            script: None,
            persona_fixture: None,
            simulation_persona_fixture: None,
        }
    }

    pub fn validate(&self) -> Result<(), AgentError> {
        match self.kind {
            AgentKind::Strategic if self.breadth == 0 => Err(AgentError::InvalidConfig(
                "strategic agent requires breadth >= 1".into(),
            )),
            AgentKind::Scripted if self.script.as_ref().map_or(true, Vec::is_empty) => Err(
                AgentError::InvalidConfig("scripted agent requires a move list".into()),
            ),
            _ => Ok(()),
        }
    }
}

/// Everything an agent may look at when choosing a move.
pub struct MoveContext<'a> {
    pub spec: &'a GameSpec,
    pub classifier: &'a dyn Classifier,
    pub state: &'a ConversationState,
    pub mover: Player,
    pub mover_type: &'a str,
    /// The opponent's realized type, when it is common knowledge.
    pub opponent_type: Option<&'a str>,
    /// Current belief over Y's types (relevant when X faces a hidden type).
    pub belief: &'a Belief,
}

impl MoveContext<'_> {
    fn type_pair(&self, sampled_y: Option<&str>) -> (String, String) {
        match self.mover {
            Player::X => (
                self.mover_type.to_string(),
                self.opponent_type
                    .map(str::to_string)
                    .or_else(|| sampled_y.map(str::to_string))
                    .unwrap_or_else(|| self.spec.y_types[0].clone()),
            ),
            Player::Y => (
                self.opponent_type
                    .map(str::to_string)
                    .unwrap_or_else(|| self.spec.x_types[0].clone()),
                self.mover_type.to_string(),
            ),
        }
    }
}

pub trait Agent {
    fn id(&self) -> &str;
    fn choose(&mut self, ctx: &MoveContext<'_>) -> Result<Utterance, AgentError>;
    fn is_deterministic(&self) -> bool {
        true
    }
}

/// Free-text move source (implemented by the llm bridge).
pub trait MoveGenerator: Send {
    fn generate(&mut self, ctx: &MoveContext<'_>) -> Result<Utterance, AgentError>;
    fn is_deterministic(&self) -> bool;
}

/// What the strategic agent assumes about moves it does not control.
#[derive(Debug, Clone, Default)]
pub enum OpponentModel {
    /// Uniform over the context menu.
    #[default]
    Naive,
    /// Follow a solved policy keyed by decision point; uniform fallback.
    Policy(BTreeMap<String, Utterance>),
}

impl OpponentModel {
    fn pick(
        &self,
        spec: &GameSpec,
        state: &ConversationState,
        mover: Player,
        mover_type: &str,
        rng: &mut ChaCha8Rng,
    ) -> Result<Utterance, AgentError> {
        if let OpponentModel::Policy(policy) = self {
            if let Some(mv) = policy.get(&decision_key(mover, mover_type, state)) {
                return Ok(mv.clone());
            }
        }
        let moves = spec.legal_moves(state, mover, Some(mover_type))?;
        Ok(moves[rng.gen_range(0..moves.len())].clone())
    }
}

// ---------------------------------------------------------------------------

/// Uniform random play over the menu, or one generator sample in free-text
/// mode.
pub struct NaiveAgent {
    id: String,
    rng: ChaCha8Rng,
    generator: Option<Box<dyn MoveGenerator>>,
}

impl NaiveAgent {
    pub fn new(seed: u64) -> NaiveAgent {
        NaiveAgent {
            id: "naive".into(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            generator: None,
        }
    }

    pub fn with_generator(seed: u64, generator: Box<dyn MoveGenerator>) -> NaiveAgent {
        NaiveAgent {
            id: "naive-freetext".into(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            generator: Some(generator),
        }
    }
}

impl Agent for NaiveAgent {
    fn id(&self) -> &str {
        &self.id
    }

    fn choose(&mut self, ctx: &MoveContext<'_>) -> Result<Utterance, AgentError> {
        if let Some(generator) = &mut self.generator {
            return generator.generate(ctx);
        }
        let moves = ctx
            .spec
            .legal_moves(ctx.state, ctx.mover, Some(ctx.mover_type))?;
        if moves.is_empty() {
            return Err(AgentError::NoMoves);
        }
        Ok(moves[self.rng.gen_range(0..moves.len())].clone())
    }

    fn is_deterministic(&self) -> bool {
        self.generator.as_ref().map_or(true, |g| g.is_deterministic())
    }
}

// ---------------------------------------------------------------------------

/// Breadth/depth introspection: sample B candidate moves, simulate D further
/// stages for each (moves it does not control come from the opponent model,
/// verdicts from the classifier), score by the mover's expected utility over
/// the simulated continuations, and play the argmax (ties: candidate order).
pub struct StrategicAgent {
    id: String,
    breadth: usize,
    depth: usize,
    rollouts: usize,
    model: OpponentModel,
    rng: ChaCha8Rng,
    generator: Option<Box<dyn MoveGenerator>>,
    /// Free-text stand-in for every simulated move the agent does not
    /// control; required when menus are empty.
    simulation_generator: Option<Box<dyn MoveGenerator>>,
}

impl StrategicAgent {
    pub fn new(breadth: usize, depth: usize, seed: u64) -> StrategicAgent {
        StrategicAgent {
            id: "strategic".into(),
            breadth,
            depth,
            rollouts: 1,
            model: OpponentModel::Naive,
            rng: ChaCha8Rng::seed_from_u64(seed),
            generator: None,
            simulation_generator: None,
        }
    }

    pub fn with_rollouts(mut self, rollouts: usize) -> StrategicAgent {
        self.rollouts = rollouts.max(1);
        self
    }

    pub fn with_model(mut self, model: OpponentModel) -> StrategicAgent {
        self.model = model;
        self
    }

    pub fn with_generator(mut self, generator: Box<dyn MoveGenerator>) -> StrategicAgent {
        self.generator = Some(generator);
        self
    }

    pub fn with_simulation_generator(
        mut self,
        generator: Box<dyn MoveGenerator>,
    ) -> StrategicAgent {
        self.simulation_generator = Some(generator);
        self
    }

    /// A modeled move for `mover` at `state` during introspection: the
    /// simulation generator when configured, otherwise the opponent model.
    fn model_move(
        &mut self,
        ctx: &MoveContext<'_>,
        state: &ConversationState,
        mover: Player,
        t_x: &str,
        t_y: &str,
    ) -> Result<Utterance, AgentError> {
        let mover_type = match mover {
            Player::X => t_x,
            Player::Y => t_y,
        };
        if let Some(generator) = &mut self.simulation_generator {
            let sub_ctx = MoveContext {
                spec: ctx.spec,
                classifier: ctx.classifier,
                state,
                mover,
                mover_type,
                opponent_type: Some(match mover {
                    Player::X => t_y,
                    Player::Y => t_x,
                }),
                belief: ctx.belief,
            };
            return generator.generate(&sub_ctx);
        }
        self.model
            .pick(ctx.spec, state, mover, mover_type, &mut self.rng)
    }

    fn candidates(&mut self, ctx: &MoveContext<'_>) -> Result<Vec<Utterance>, AgentError> {
        if let Some(generator) = &mut self.generator {
            let mut out = Vec::with_capacity(self.breadth);
            for _ in 0..self.breadth {
                out.push(generator.generate(ctx)?);
            }
            return Ok(out);
        }
        let menu = ctx
            .spec
            .legal_moves(ctx.state, ctx.mover, Some(ctx.mover_type))?;
        if menu.is_empty() {
            return Err(AgentError::NoMoves);
        }
        if self.breadth >= menu.len() {
            return Ok(menu);
        }
        // sample `breadth` distinct menu entries (partial Fisher-Yates)
        let mut indices: Vec<usize> = (0..menu.len()).collect();
        for i in 0..self.breadth {
            let j = self.rng.gen_range(i..indices.len());
            indices.swap(i, j);
        }
        Ok(indices[..self.breadth]
            .iter()
            .map(|&i| menu[i].clone())
            .collect())
    }

    /// One simulated continuation; returns the mover's payoff.
    fn simulate(
        &mut self,
        ctx: &MoveContext<'_>,
        candidate: &Utterance,
    ) -> Result<f64, AgentError> {
        let spec = ctx.spec;
        // determinize the hidden type for this rollout
        let sampled_y;
        let (t_x, t_y) = if ctx.mover == Player::X && ctx.opponent_type.is_none() {
            sampled_y = ctx.belief.sample(&mut self.rng).to_string();
            ctx.type_pair(Some(&sampled_y))
        } else {
            ctx.type_pair(None)
        };
        // first stage: the candidate plus the modeled reply (X mover), or
        // the pending X move plus the candidate (Y mover)
        let mut state = match ctx.mover {
            Player::X => {
                let pending = ctx.state.with_pending_x(candidate.clone())?;
                let reply = self.model_move(ctx, &pending, Player::Y, &t_x, &t_y)?;
                play_stage(spec, ctx.classifier, &pending, candidate.clone(), reply)?
            }
            Player::Y => {
                let pending = ctx
                    .state
                    .pending_x
                    .clone()
                    .ok_or_else(|| AgentError::InvalidConfig("Y moves on a pending state".into()))?;
                play_stage(spec, ctx.classifier, ctx.state, pending, candidate.clone())?
            }
        };

        let mut simulated = 1;
        while simulated < self.depth {
            if state.is_terminal(spec) {
                break;
            }
            let x_move = self.model_move(ctx, &state, Player::X, &t_x, &t_y)?;
            let pending = state.with_pending_x(x_move.clone())?;
            let y_move = self.model_move(ctx, &pending, Player::Y, &t_x, &t_y)?;
            state = play_stage(spec, ctx.classifier, &pending, x_move, y_move)?;
            simulated += 1;
        }

        // conclusive verdicts pay out; Cont at depth exhaustion is valued by
        // the Cont payoff
        let verdict = state.terminal_verdict(spec).unwrap_or(Verdict::Cont);
        Ok(spec.payoff(ctx.mover, &t_x, &t_y, verdict)?)
    }
}

impl Agent for StrategicAgent {
    fn id(&self) -> &str {
        &self.id
    }

    fn choose(&mut self, ctx: &MoveContext<'_>) -> Result<Utterance, AgentError> {
        let candidates = self.candidates(ctx)?;
        if self.depth == 0 || candidates.len() == 1 {
            return Ok(candidates.into_iter().next().unwrap());
        }
        let mut best: Option<(f64, Utterance)> = None;
        for candidate in candidates {
            let mut total = 0.0;
            for _ in 0..self.rollouts {
                total += self.simulate(ctx, &candidate)?;
            }
            let score = total / self.rollouts as f64;
            if best.as_ref().map_or(true, |(b, _)| score > *b) {
                best = Some((score, candidate));
            }
        }
        Ok(best.expect("at least one candidate").1)
    }

    fn is_deterministic(&self) -> bool {
        self.generator.as_ref().map_or(true, |g| g.is_deterministic())
    }
}

// ---------------------------------------------------------------------------

/// Plays what a solver recommends: the precomputed SPE policy (`exact`),
/// or a fresh seeded search per move (`mcts` / `ismcts`).
pub struct SolverAgent {
    id: String,
    engine: SolverEngine,
    iterations: u64,
    exploration_c: f64,
    node_budget: u64,
    rng: ChaCha8Rng,
    cached_policy: Option<BTreeMap<String, Utterance>>,
}

impl SolverAgent {
    pub fn new(engine: SolverEngine, iterations: u64, exploration_c: f64, seed: u64) -> SolverAgent {
        SolverAgent {
            id: format!("solver-{}", match engine {
                SolverEngine::Exact => "exact",
                SolverEngine::Mcts => "mcts",
                SolverEngine::Ismcts => "ismcts",
            }),
            engine,
            iterations,
            exploration_c,
            node_budget: SolveOptions::default().node_budget,
            rng: ChaCha8Rng::seed_from_u64(seed),
            cached_policy: None,
        }
    }
}

impl Agent for SolverAgent {
    fn id(&self) -> &str {
        &self.id
    }

    fn choose(&mut self, ctx: &MoveContext<'_>) -> Result<Utterance, AgentError> {
        match self.engine {
            SolverEngine::Exact => {
                if self.cached_policy.is_none() {
                    let result = solve_backward_induction(
                        ctx.spec,
                        ctx.classifier,
                        SolveOptions {
                            node_budget: self.node_budget,
                        },
                    )?;
                    self.cached_policy = Some(result.policy);
                }
                let key = decision_key(ctx.mover, ctx.mover_type, ctx.state);
                self.cached_policy
                    .as_ref()
                    .unwrap()
                    .get(&key)
                    .cloned()
                    .ok_or(AgentError::PolicyMiss(key))
            }
            SolverEngine::Mcts => {
                let seed = self.rng.gen();
                let opts = MctsOptions {
                    iterations: self.iterations,
                    exploration_c: self.exploration_c,
                    seed,
                };
                let (chosen, _) = mcts(ctx.spec, ctx.classifier, ctx.state, opts)?;
                Ok(chosen)
            }
            SolverEngine::Ismcts => {
                let seed = self.rng.gen();
                let opts = MctsOptions {
                    iterations: self.iterations,
                    exploration_c: self.exploration_c,
                    seed,
                };
                let (chosen, _) = ismcts(ctx.spec, ctx.classifier, ctx.state, ctx.belief, opts)?;
                Ok(chosen)
            }
        }
    }
}

// ---------------------------------------------------------------------------

/// Replays a fixed move list in order.
pub struct ScriptedAgent {
    id: String,
    script: Vec<Utterance>,
    next: usize,
}

impl ScriptedAgent {
    pub fn new(script: Vec<Utterance>) -> ScriptedAgent {
        ScriptedAgent {
            id: "scripted".into(),
            script,
            next: 0,
        }
    }
}

impl Agent for ScriptedAgent {
    fn id(&self) -> &str {
        &self.id
    }

    fn choose(&mut self, _ctx: &MoveContext<'_>) -> Result<Utterance, AgentError> {
        let mv = self
            .script
            .get(self.next)
            .cloned()
            .ok_or(AgentError::ScriptExhausted(self.script.len()))?;
        self.next += 1;
        Ok(mv)
    }
}

// ---------------------------------------------------------------------------

/// Stable per-agent seed derivation: mixes the configured agent seed, the
/// match seed and the seat.
pub fn derive_agent_seed(config_seed: Option<u64>, match_seed: u64, player: Player) -> u64 {
    let seat = match player {
        Player::X => 0x58,
        Player::Y => 0x59,
    };
    config_seed
        .unwrap_or(0)
        .wrapping_mul(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(match_seed)
        .rotate_left(17)
        .wrapping_add(seat)
}

/// Build a non-interactive agent from its config. `generator` supplies
/// free-text moves (llm bridge); human agents are interactive and built by
/// the CLI instead.
pub fn build_agent(
    config: &AgentConfig,
    player: Player,
    match_seed: u64,
    generator: Option<Box<dyn MoveGenerator>>,
) -> Result<Box<dyn Agent>, AgentError> {
    config.validate()?;
    let seed = derive_agent_seed(config.seed, match_seed, player);
    Ok(match config.kind {
        AgentKind::Naive => match generator {
            Some(g) => Box::new(NaiveAgent::with_generator(seed, g)),
            None => Box::new(NaiveAgent::new(seed)),
        },
        AgentKind::Strategic => {
            let mut agent = StrategicAgent::new(config.breadth, config.depth, seed)
                .with_rollouts(config.rollouts_per_candidate);
            if let Some(g) = generator {
                agent = agent.with_generator(g);
            }
            Box::new(agent)
        }
        AgentKind::Solver => Box::new(SolverAgent::new(
            config.engine.unwrap_or(SolverEngine::Exact),
            config.iterations,
            config
                .exploration_c
                .unwrap_or(std::f64::consts::SQRT_2),
            seed,
        )),
        AgentKind::Scripted => Box::new(ScriptedAgent::new(
            config.script.clone().expect("validated above"),
        )),
        AgentKind::Human => {
            return Err(AgentError::InvalidConfig(
                "human agents are interactive; run them through the play command".into(),
            ))
        }
    })
}

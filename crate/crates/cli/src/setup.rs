//! Shared wiring: config loading, chat backends, and building agents that
//! may need free-text generators.

use crate::{BackendArg, CliError};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use verdict_core::agent::{
    build_agent, derive_agent_seed, Agent, AgentConfig, AgentKind, NaiveAgent, StrategicAgent,
};
use verdict_core::classifier::{resolve_classifier, Classifier, ClassifierSpec};
use verdict_core::config::{ConfigFile, LlmSection};
use verdict_core::game::{GameSpec, Player};
use verdict_core::llm::{
    build_llm_judge, AuditLog, ChatBackend, ClientLimits, HttpBackend, LlmClient, LlmPlayer,
    MockBackend,
};

pub fn load_config(path: &Path) -> Result<ConfigFile, CliError> {
    ConfigFile::load(path).map_err(|e| CliError::Usage(e.to_string()))
}

pub fn usage<T: std::fmt::Display>(e: T) -> CliError {
    CliError::Usage(e.to_string())
}

pub fn runtime<T: std::fmt::Display>(e: T) -> CliError {
    CliError::Runtime(e.to_string())
}

/// Backend plus fixture locations, shared by every match of a run.
pub struct LlmRuntime {
    backend: Arc<dyn ChatBackend>,
    limits: ClientLimits,
    pub model_id: String,
    pub fixtures_dir: PathBuf,
}

impl LlmRuntime {
    pub fn from_section(section: &LlmSection, backend: BackendArg) -> Result<LlmRuntime, CliError> {
        let fixtures_dir = PathBuf::from(&section.fixtures_dir);
        let backend: Arc<dyn ChatBackend> = match backend {
            BackendArg::Mock => {
                let path = section
                    .mock_replies
                    .as_ref()
                    .map(PathBuf::from)
                    .unwrap_or_else(|| fixtures_dir.join("mock_replies.json"));
                Arc::new(MockBackend::from_file(&path).map_err(usage)?)
            }
            BackendArg::Live => Arc::new(
                HttpBackend::new(
                    section
                        .base_url
                        .clone()
                        .unwrap_or_else(|| "https://api.openai.com/v1".into()),
                )
                .map_err(usage)?,
            ),
        };
        Ok(LlmRuntime {
            backend,
            limits: ClientLimits {
                max_in_flight: section.max_in_flight,
                requests_per_sec: section.requests_per_sec,
                ..ClientLimits::default()
            },
            model_id: section.model_id.clone(),
            fixtures_dir,
        })
    }

    /// A fresh client writing into `audit` (one per match, so records carry
    /// only their own calls).
    pub fn client(&self, audit: &AuditLog) -> Arc<LlmClient> {
        Arc::new(LlmClient::new(
            self.backend.clone(),
            self.limits,
            audit.clone(),
        ))
    }

    pub fn persona(&self, fixture: &str) -> Result<String, CliError> {
        let path = self.fixtures_dir.join(fixture);
        std::fs::read_to_string(&path)
            .map(|s| s.trim_end().to_string())
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }
}

/// Build the classifier a run actually uses; the llm kind needs a backend.
pub fn build_classifier(
    spec: &GameSpec,
    rt: Option<&LlmRuntime>,
    client: Option<&Arc<LlmClient>>,
) -> Result<Box<dyn Classifier>, CliError> {
    match &spec.classifier {
        ClassifierSpec::Llm {
            model_id,
            judge_fixtures,
        } => {
            let _ = rt.ok_or_else(|| {
                usage("the llm judge needs an [llm] config section and a backend")
            })?;
            let client = client.expect("client accompanies the llm runtime");
            let judge = build_llm_judge(client.clone(), model_id, Path::new(judge_fixtures))
                .map_err(usage)?;
            Ok(Box::new(judge))
        }
        other => resolve_classifier(other).map_err(usage),
    }
}

/// Build one seat, attaching llm generators when the config names personas.
pub fn build_seat(
    cfg: &AgentConfig,
    player: Player,
    match_seed: u64,
    rt: Option<&LlmRuntime>,
    client: Option<&Arc<LlmClient>>,
) -> Result<Box<dyn Agent>, CliError> {
    let persona = match &cfg.persona_fixture {
        Some(fixture) => {
            let rt = rt.ok_or_else(|| {
                usage("persona_fixture requires an [llm] config section and a backend")
            })?;
            Some((rt, rt.persona(fixture)?))
        }
        None => None,
    };
    let seed = derive_agent_seed(cfg.seed, match_seed, player);
    match (&cfg.kind, persona) {
        (AgentKind::Naive, Some((rt, persona))) => {
            let client = client.expect("client accompanies the llm runtime").clone();
            let generator = Box::new(LlmPlayer::new(client, rt.model_id.clone(), persona));
            Ok(Box::new(NaiveAgent::with_generator(seed, generator)))
        }
        (AgentKind::Strategic, Some((rt, persona))) => {
            let client = client.expect("client accompanies the llm runtime").clone();
            let mut agent = StrategicAgent::new(cfg.breadth, cfg.depth, seed)
                .with_rollouts(cfg.rollouts_per_candidate)
                .with_generator(Box::new(LlmPlayer::new(
                    client.clone(),
                    rt.model_id.clone(),
                    persona,
                )));
            if let Some(fixture) = &cfg.simulation_persona_fixture {
                agent = agent.with_simulation_generator(Box::new(LlmPlayer::new(
                    client,
                    rt.model_id.clone(),
                    rt.persona(fixture)?,
                )));
            }
            Ok(Box::new(agent))
        }
        (AgentKind::Human, _) => Ok(Box::new(crate::human::HumanAgent::new())),
        _ => build_agent(cfg, player, match_seed, None).map_err(usage),
    }
}

/// Whether this run can go through the pure in-core harness (no generators,
/// no external judge).
pub fn needs_llm(spec: &GameSpec, agents: &[&AgentConfig]) -> bool {
    matches!(spec.classifier, ClassifierSpec::Llm { .. })
        || agents.iter().any(|a| a.persona_fixture.is_some())
}

//! One function per subcommand.

use crate::report::print_summaries;
use crate::setup::{
    build_classifier, build_seat, load_config, needs_llm, runtime, usage, LlmRuntime,
};
use crate::{BackendArg, CliError, EngineArg};
use std::path::Path;
use verdict_core::agent::{AgentConfig, AgentKind};
use verdict_core::classifier::ClassifierSpec;
use verdict_core::config::{spec_digest, LlmSection};
use verdict_core::game::{builtin_game, BuiltinGame, ConversationState, GameSpec, Player};
use verdict_core::harness::{
    persist, replay_verdicts, run_experiment, run_match_with, summarize_arm, ArmResult,
    ExperimentArm, ExperimentSpec, MatchRecord,
};
use verdict_core::llm::AuditLog;
use verdict_core::solver::{
    ismcts, mcts, solve_backward_induction, solve_bruteforce, Belief, BruteforceOptions,
    BruteforceOutcome, MctsOptions, SolveOptions, SolveResult,
};

fn write_json<T: serde::Serialize>(value: &T, path: &Path) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(runtime)?;
    std::fs::write(path, text + "\n").map_err(runtime)
}

fn print_solve_result(result: &SolveResult) {
    println!("root values:");
    for v in &result.root_values {
        println!("  t_x={} t_y={} x={} y={}", v.t_x, v.t_y, v.x, v.y);
    }
    println!("expected X value: {}", result.expected_x_value);
    println!("nodes: {}", result.node_count);
    println!("policy entries: {}", result.policy.len());
}

pub fn solve(
    config: &Path,
    out: Option<&Path>,
    engine: EngineArg,
    iterations: u64,
    seed: u64,
    verbose: bool,
) -> Result<(), CliError> {
    let file = load_config(config)?;
    let spec = file.resolve_game().map_err(usage)?;
    let classifier = build_classifier(&spec, None, None)?;
    if verbose {
        println!("game: {}", spec.name);
        println!("config digest: {}", file.digest());
    }
    match engine {
        EngineArg::Exact | EngineArg::Bruteforce => {
            let outcome = if engine == EngineArg::Exact && spec.is_complete_information() {
                solve_backward_induction(&spec, classifier.as_ref(), SolveOptions::default())
                    .map(BruteforceOutcome::Equilibrium)
                    .map_err(runtime)?
            } else {
                solve_bruteforce(&spec, classifier.as_ref(), BruteforceOptions::default())
                    .map_err(runtime)?
            };
            match outcome {
                BruteforceOutcome::Equilibrium(result) => {
                    print_solve_result(&result);
                    if let Some(path) = out {
                        write_json(&result, path)?;
                    }
                }
                BruteforceOutcome::NoPurePbe => {
                    println!("no pure PBE");
                }
            }
        }
        EngineArg::Mcts | EngineArg::Ismcts => {
            let root = ConversationState::new(spec.seed_text.clone());
            let opts = MctsOptions {
                iterations,
                exploration_c: std::f64::consts::SQRT_2,
                seed,
            };
            let (chosen, stats) = match engine {
                EngineArg::Mcts => {
                    mcts(&spec, classifier.as_ref(), &root, opts).map_err(runtime)?
                }
                _ => {
                    let belief = Belief::from_prior(&spec).map_err(runtime)?;
                    ismcts(&spec, classifier.as_ref(), &root, &belief, opts).map_err(runtime)?
                }
            };
            println!("chosen root move: {}", chosen.text());
            for action in &stats.actions {
                println!(
                    "  {}: visits={} mean_x={:.4}",
                    action.action.text(),
                    action.visits,
                    action.mean_value
                );
            }
            if let Some(path) = out {
                write_json(&stats, path)?;
            }
        }
    }
    Ok(())
}

/// The experiment loop for runs that need chat backends: fresh audit log,
/// client, judge and agents per match, so records stay self-contained and
/// reproducible.
fn run_llm_experiment(
    spec: &GameSpec,
    rt: &LlmRuntime,
    experiment: &ExperimentSpec,
    digest: &str,
    verbose: bool,
) -> Result<Vec<ArmResult>, CliError> {
    experiment.validate().map_err(usage)?;
    let mut results = Vec::new();
    for arm in &experiment.arms {
        let mut records = Vec::new();
        for index in 0..experiment.n_matches {
            let seed = experiment.base_seed.wrapping_add(index);
            let audit = AuditLog::new();
            let client = rt.client(&audit);
            let classifier = build_classifier(spec, Some(rt), Some(&client))?;
            let mut agent_x = build_seat(&arm.agent_x, Player::X, seed, Some(rt), Some(&client))?;
            let mut agent_y =
                build_seat(&experiment.agent_y, Player::Y, seed, Some(rt), Some(&client))?;
            let mut record = run_match_with(
                spec,
                classifier.as_ref(),
                agent_x.as_mut(),
                agent_y.as_mut(),
                seed,
                digest,
                Some(&audit),
            );
            record.arm = arm.name.clone();
            if verbose {
                eprintln!(
                    "[{}] seed {} -> {:?}{}",
                    arm.name,
                    seed,
                    record.terminal_verdict,
                    record
                        .failed
                        .as_deref()
                        .map(|m| format!(" (failed: {m})"))
                        .unwrap_or_default()
                );
            }
            records.push(record);
        }
        let summary = summarize_arm(&arm.name, &records);
        results.push(ArmResult { summary, records });
    }
    Ok(results)
}

fn report_and_persist(results: &[ArmResult], out: Option<&Path>) -> Result<(), CliError> {
    let summaries: Vec<_> = results.iter().map(|r| r.summary.clone()).collect();
    print_summaries(&summaries);
    if let Some(path) = out {
        let records: Vec<MatchRecord> = results
            .iter()
            .flat_map(|r| r.records.iter().cloned())
            .collect();
        persist::persist(&records, path).map_err(runtime)?;
        println!("wrote {} records to {}", records.len(), path.display());
    }
    Ok(())
}

pub fn simulate(
    config: &Path,
    out: Option<&Path>,
    seed: Option<u64>,
    backend: BackendArg,
    verbose: bool,
) -> Result<(), CliError> {
    let file = load_config(config)?;
    let (spec, mut experiment) = file.resolve_experiment().map_err(usage)?;
    if let Some(seed) = seed {
        experiment.base_seed = seed;
    }
    experiment.validate().map_err(usage)?;
    let digest = file.digest();
    if verbose {
        println!("config digest: {digest}");
    }
    let mut agents: Vec<&AgentConfig> = vec![&experiment.agent_y];
    agents.extend(experiment.arms.iter().map(|a| &a.agent_x));
    let results = if needs_llm(&spec, &agents) {
        let section = file
            .llm
            .as_ref()
            .ok_or_else(|| usage("this experiment needs an [llm] config section"))?;
        let rt = LlmRuntime::from_section(section, backend)?;
        run_llm_experiment(&spec, &rt, &experiment, &digest, verbose)?
    } else {
        let classifier = build_classifier(&spec, None, None)?;
        run_experiment(&spec, classifier.as_ref(), &experiment, &digest).map_err(runtime)?
    };
    report_and_persist(&results, out)
}

pub fn play(config: &Path, seed: Option<u64>, backend: BackendArg) -> Result<(), CliError> {
    let file = load_config(config)?;
    let spec = file.resolve_game().map_err(usage)?;
    let play = file
        .play
        .clone()
        .ok_or_else(|| usage("play needs a [play] config section"))?;
    let seed = seed.unwrap_or(play.seed);
    let digest = file.digest();

    let audit = AuditLog::new();
    let (rt, client) = if needs_llm(&spec, &[&play.agent_x, &play.agent_y]) {
        let section = file
            .llm
            .as_ref()
            .ok_or_else(|| usage("this game needs an [llm] config section"))?;
        let rt = LlmRuntime::from_section(section, backend)?;
        let client = rt.client(&audit);
        (Some(rt), Some(client))
    } else {
        (None, None)
    };
    let classifier = build_classifier(&spec, rt.as_ref(), client.as_ref())?;
    let mut agent_x = build_seat(&play.agent_x, Player::X, seed, rt.as_ref(), client.as_ref())?;
    let mut agent_y = build_seat(&play.agent_y, Player::Y, seed, rt.as_ref(), client.as_ref())?;
    let record = run_match_with(
        &spec,
        classifier.as_ref(),
        agent_x.as_mut(),
        agent_y.as_mut(),
        seed,
        &digest,
        Some(&audit),
    );

    if let Some(message) = &record.failed {
        if message.contains(crate::human::ABORT_MESSAGE) {
            println!("session aborted");
            return Ok(());
        }
        return Err(CliError::Runtime(message.clone()));
    }
    println!("\n--- final conversation ---");
    for stage in &record.stages {
        println!("X: {}", stage.x.text());
        println!("Y: {}", stage.y.text());
        println!("judge: {:?}", stage.verdict);
    }
    println!("terminal verdict: {:?}", record.terminal_verdict);
    println!("payoffs: X={} Y={}", record.payoff_x, record.payoff_y);
    Ok(())
}

pub fn analyze(records_path: &Path, verbose: bool) -> Result<(), CliError> {
    let records = persist::load(records_path).map_err(runtime)?;
    // group by arm, in first-appearance order
    let mut arms: Vec<(String, Vec<MatchRecord>)> = Vec::new();
    for record in records {
        let name = record.arm.clone();
        match arms.iter_mut().find(|(n, _)| *n == name) {
            Some((_, group)) => group.push(record),
            None => arms.push((name, vec![record])),
        }
    }
    let mut mismatches = 0;
    for (name, group) in &arms {
        for record in group {
            if let Err(e) = replay_verdicts(record) {
                eprintln!(
                    "warning: replay mismatch (arm {:?}, seed {}): {e}",
                    name, record.seed
                );
                mismatches += 1;
            }
        }
    }
    if verbose {
        println!(
            "checked {} records, {mismatches} replay mismatches",
            arms.iter().map(|(_, g)| g.len()).sum::<usize>()
        );
    }
    let summaries: Vec<_> = arms
        .iter()
        .map(|(name, group)| summarize_arm(name, group))
        .collect();
    print_summaries(&summaries);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn replicate_court(
    backend: BackendArg,
    fixtures: &Path,
    out: Option<&Path>,
    seed: u64,
    matches: u64,
    model: &str,
    verbose: bool,
) -> Result<(), CliError> {
    let mut spec = builtin_game(BuiltinGame::Court);
    spec.name = "replicate-court".into();
    spec.max_stages = 3;
    spec.max_utterance_len = 64;
    spec.classifier_id = "llm-judge".into();
    spec.classifier = ClassifierSpec::Llm {
        model_id: model.to_string(),
        judge_fixtures: fixtures.display().to_string(),
    };

    let section = LlmSection {
        model_id: model.to_string(),
        base_url: None,
        mock_replies: None,
        fixtures_dir: fixtures.display().to_string(),
        max_in_flight: 4,
        requests_per_sec: None,
    };
    let rt = LlmRuntime::from_section(&section, backend)?;

    let mut strategic = AgentConfig::of_kind(AgentKind::Strategic);
    strategic.breadth = 10;
    strategic.depth = 1;
    strategic.persona_fixture = Some("prosecutor_persona.txt".into());
    strategic.simulation_persona_fixture = Some("defence_persona.txt".into());
    let mut naive_x = AgentConfig::of_kind(AgentKind::Naive);
    naive_x.persona_fixture = Some("prosecutor_persona.txt".into());
    let mut agent_y = AgentConfig::of_kind(AgentKind::Naive);
    agent_y.persona_fixture = Some("defence_persona.txt".into());

    let experiment = ExperimentSpec {
        agent_y,
        arms: vec![
            ExperimentArm {
                name: "strategic".into(),
                agent_x: strategic,
            },
            ExperimentArm {
                name: "naive".into(),
                agent_x: naive_x,
            },
        ],
        n_matches: matches,
        base_seed: seed,
    };
    let digest = spec_digest(&spec);
    let results = run_llm_experiment(&spec, &rt, &experiment, &digest, verbose)?;
    report_and_persist(&results, out)
}

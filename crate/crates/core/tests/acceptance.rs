//! End-to-end checks of the engine's core guarantees. Each test prints one
//! pass/fail line (visible with `--nocapture`, or on failure).

use num::rational::BigRational;
use num::bigint::BigInt;
use num::{ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::time::Instant;
use verdict_core::agent::{AgentConfig, AgentKind};
use verdict_core::classifier::{resolve_classifier, ClassifierSpec, TriggerPrecedence};
use verdict_core::config::spec_digest;
use verdict_core::game::{
    builtin_game, utt, BuiltinGame, ConversationState, MenuRule, Player, Token, Verdict,
};
use verdict_core::harness::stats::{compare_arms, fisher_exact_two_sided, SignificanceTest};
use verdict_core::harness::{
    run_experiment, verify_record, ArmSummary, ExperimentArm, ExperimentSpec,
};
use verdict_core::solver::randgen::{random_court_game, RandomGameParams};
use verdict_core::solver::{
    ismcts, mcts, solve_backward_induction, solve_bruteforce, update_belief, Belief,
    BruteforceOptions, MctsOptions, TypedMovePolicy,
};

fn check(n: usize, name: &str, result: Result<(), String>) {
    match result {
        Ok(()) => println!("criterion {n} ({name}): pass"),
        Err(e) => {
            println!("criterion {n} ({name}): fail: {e}");
            panic!("criterion {n} ({name}) failed: {e}");
        }
    }
}

#[test]
fn criterion_1_exact_solvers_agree_on_200_random_games() {
    check(1, "backward induction matches brute force on 200 random games", (|| {
        for seed in 0..200u64 {
            let spec = random_court_game(seed, RandomGameParams::default());
            let classifier =
                resolve_classifier(&spec.classifier).map_err(|e| format!("seed {seed}: {e}"))?;
            let bi = solve_backward_induction(&spec, classifier.as_ref(), Default::default())
                .map_err(|e| format!("seed {seed}: {e}"))?;
            let bf = solve_bruteforce(&spec, classifier.as_ref(), BruteforceOptions::default())
                .map_err(|e| format!("seed {seed}: {e}"))?;
            let bf = bf
                .equilibrium()
                .ok_or_else(|| format!("seed {seed}: no pure equilibrium found"))?;
            if bi.root_values != bf.root_values {
                return Err(format!(
                    "seed {seed}: root values differ: {:?} vs {:?}",
                    bi.root_values, bf.root_values
                ));
            }
            if bi.expected_x_value != bf.expected_x_value {
                return Err(format!(
                    "seed {seed}: expected X value differs: {} vs {}",
                    bi.expected_x_value, bf.expected_x_value
                ));
            }
            if bi.policy != bf.policy {
                return Err(format!("seed {seed}: policies differ"));
            }
        }
        Ok(())
    })());
}

#[test]
fn criterion_2_court_utilities_are_zero_sum() {
    check(2, "court utilities", (|| {
        let spec = builtin_game(BuiltinGame::Court);
        let want = [(Verdict::Zero, -1.0), (Verdict::One, 1.0), (Verdict::Cont, -1.0)];
        for (v, x_want) in want {
            let x = spec
                .payoff(Player::X, "Prosecutor", "Defence", v)
                .map_err(|e| e.to_string())?;
            let y = spec
                .payoff(Player::Y, "Prosecutor", "Defence", v)
                .map_err(|e| e.to_string())?;
            if x != x_want {
                return Err(format!("u_X({v}) = {x}, want {x_want}"));
            }
            if x + y != 0.0 {
                return Err(format!("not zero-sum at {v}: x={x} y={y}"));
            }
        }
        Ok(())
    })());
}

#[test]
fn criterion_3_interrogation_table_and_turing_relabel() {
    check(3, "interrogation utility table and Turing relabeling", (|| {
        let spec = builtin_game(BuiltinGame::Interrogation);
        let cases = [
            (Player::X, "Non-Guilty", Verdict::Zero, 1.0),
            (Player::X, "Non-Guilty", Verdict::One, -1.0),
            (Player::X, "Non-Guilty", Verdict::Cont, 0.0),
            (Player::X, "Guilty", Verdict::Zero, -1.0),
            (Player::X, "Guilty", Verdict::One, 1.0),
            (Player::X, "Guilty", Verdict::Cont, 0.0),
            (Player::Y, "Non-Guilty", Verdict::Zero, 1.0),
            (Player::Y, "Non-Guilty", Verdict::One, -1.0),
            (Player::Y, "Non-Guilty", Verdict::Cont, 1.0),
            (Player::Y, "Guilty", Verdict::Zero, 1.0),
            (Player::Y, "Guilty", Verdict::One, -1.0),
            (Player::Y, "Guilty", Verdict::Cont, 1.0),
        ];
        for (player, t_y, v, want) in cases {
            let got = spec
                .payoff(player, "Interrogator", t_y, v)
                .map_err(|e| e.to_string())?;
            if got != want {
                return Err(format!("u_{player}({t_y}, {v}) = {got}, want {want}"));
            }
        }
        let turing = builtin_game(BuiltinGame::Turing);
        if turing.y_types != vec!["Machine".to_string(), "Human".to_string()] {
            return Err(format!("turing y_types: {:?}", turing.y_types));
        }
        let relabel = |t: &str| match t {
            "Machine" => "Guilty",
            _ => "Non-Guilty",
        };
        for t_y in &turing.y_types {
            for player in [Player::X, Player::Y] {
                for v in [Verdict::Zero, Verdict::One, Verdict::Cont] {
                    let a = turing
                        .payoff(player, "Interrogator", t_y, v)
                        .map_err(|e| e.to_string())?;
                    let b = spec
                        .payoff(player, "Interrogator", relabel(t_y), v)
                        .map_err(|e| e.to_string())?;
                    if a != b {
                        return Err(format!("turing({t_y}) != interrogation at {player} {v}"));
                    }
                }
            }
        }
        Ok(())
    })());
}

#[test]
fn criterion_4_search_finds_exact_optima_on_tiny_games() {
    check(4, "mcts near-optimal and ismcts consistent on 20 tiny games", (|| {
        let mut optimal = 0usize;
        for seed in 1000..1020u64 {
            let spec = random_court_game(seed, RandomGameParams::default());
            let classifier =
                resolve_classifier(&spec.classifier).map_err(|e| format!("seed {seed}: {e}"))?;
            let root = ConversationState::new(spec.seed_text.clone());
            let opts = MctsOptions::new(10_000, seed);
            let (chosen, stats) = mcts(&spec, classifier.as_ref(), &root, opts)
                .map_err(|e| format!("seed {seed}: {e}"))?;

            // exact value of the chosen root move: re-solve with the root
            // menu pinned to it
            let exact = solve_backward_induction(&spec, classifier.as_ref(), Default::default())
                .map_err(|e| format!("seed {seed}: {e}"))?;
            let mut pinned = spec.clone();
            pinned.menus.x.insert(
                0,
                MenuRule {
                    when_type: None,
                    when_last_x: None,
                    when_stage: Some(0),
                    moves: vec![chosen.clone()],
                },
            );
            let value_of_chosen =
                solve_backward_induction(&pinned, classifier.as_ref(), Default::default())
                    .map_err(|e| format!("seed {seed}: {e}"))?
                    .expected_x_value;
            if (value_of_chosen - exact.expected_x_value).abs() < 1e-9 {
                optimal += 1;
            }

            // a point-mass belief reduces ismcts to mcts, bit for bit
            let belief = Belief::point_mass(spec.y_types.clone(), &spec.y_types[0])
                .map_err(|e| format!("seed {seed}: {e}"))?;
            let (ichosen, istats) = ismcts(&spec, classifier.as_ref(), &root, &belief, opts)
                .map_err(|e| format!("seed {seed}: {e}"))?;
            if ichosen != chosen {
                return Err(format!("seed {seed}: ismcts chose {ichosen:?}, mcts {chosen:?}"));
            }
            if stats.actions.len() != istats.actions.len()
                || stats
                    .actions
                    .iter()
                    .zip(&istats.actions)
                    .any(|(a, b)| a.visits != b.visits || a.action != b.action)
            {
                return Err(format!("seed {seed}: ismcts root stats differ from mcts"));
            }
        }
        if optimal < 19 {
            return Err(format!("mcts optimal on only {optimal}/20 games"));
        }
        Ok(())
    })());
}

fn binom(n: u64, k: u64) -> BigInt {
    let mut num = BigInt::from(1u32);
    for i in 0..k {
        num *= BigInt::from(n - i);
    }
    let mut den = BigInt::from(1u32);
    for i in 1..=k.max(1) {
        den *= BigInt::from(i);
    }
    num / den
}

/// Exact-rational two-sided Fisher test, written independently of the
/// floating-point one it checks.
fn fisher_oracle(a_w: u64, a_n: u64, b_w: u64, b_n: u64) -> BigRational {
    let k = a_w + b_w;
    let total = binom(a_n + b_n, k);
    let prob = |x: u64| BigRational::new(binom(a_n, x) * binom(b_n, k - x), total.clone());
    let observed = prob(a_w);
    let mut p = BigRational::zero();
    for x in k.saturating_sub(b_n)..=k.min(a_n) {
        let px = prob(x);
        if px <= observed {
            p += px;
        }
    }
    p
}

#[test]
fn criterion_5_fisher_exact_matches_rational_oracle() {
    check(5, "fisher exact test", (|| {
        let arm = |name: &str, wins: u64, n: u64| ArmSummary {
            name: name.into(),
            wins,
            losses: n - wins,
            non_conclusive: 0,
            excluded: 0,
            n,
            win_rate: wins as f64 / n as f64,
        };
        let p = compare_arms(
            &arm("strategic", 64, 100),
            &arm("naive", 27, 100),
            SignificanceTest::FisherExact,
        )
        .map_err(|e| e.to_string())?;
        if p >= 1e-5 {
            return Err(format!("p = {p}, expected < 1e-5"));
        }
        let frozen = 2.33934621341036e-07;
        if ((p - frozen) / frozen).abs() >= 1e-9 {
            return Err(format!("p = {p:e}, drifted from {frozen:e}"));
        }
        for (a_w, a_n, b_w, b_n) in
            [(64, 100, 27, 100), (10, 10, 0, 10), (50, 100, 50, 100), (3, 12, 9, 14)]
        {
            let engine = fisher_exact_two_sided(a_w, a_n, b_w, b_n).map_err(|e| e.to_string())?;
            let oracle = fisher_oracle(a_w, a_n, b_w, b_n)
                .to_f64()
                .ok_or("oracle value not representable")?;
            if ((engine - oracle) / oracle).abs() >= 1e-10 {
                return Err(format!(
                    "({a_w}/{a_n} vs {b_w}/{b_n}): engine {engine:e}, oracle {oracle:e}"
                ));
            }
        }
        Ok(())
    })());
}

/// Court variant with ten root questions; exactly two of them force an
/// incriminating reply.
fn trap_game() -> verdict_core::GameSpec {
    let mut spec = builtin_game(BuiltinGame::Court);
    spec.name = "trap-benchmark".into();
    spec.max_stages = 2;
    spec.menus.x = vec![MenuRule::unconditional(
        (1..=10).map(|i| utt([format!("q{i}")])).collect(),
    )];
    spec.menus.y = vec![
        MenuRule {
            when_type: None,
            when_last_x: Some("q3".into()),
            when_stage: None,
            moves: vec![utt(["inconsistent"])],
        },
        MenuRule {
            when_type: None,
            when_last_x: Some("q7".into()),
            when_stage: None,
            moves: vec![utt(["inconsistent"])],
        },
        MenuRule::unconditional(vec![utt(["deny"]), utt(["deflect"])]),
    ];
    spec.classifier_id = "keyword".into();
    spec.classifier = ClassifierSpec::Keyword {
        guilty_triggers: vec![Token::new("inconsistent").unwrap()],
        innocent_triggers: vec![],
        precedence: TriggerPrecedence::GuiltyFirst,
    };
    spec
}

fn trap_experiment(n_matches: u64) -> ExperimentSpec {
    let mut strategic = AgentConfig::of_kind(AgentKind::Strategic);
    strategic.breadth = 10;
    strategic.depth = 1;
    ExperimentSpec {
        agent_y: AgentConfig::of_kind(AgentKind::Naive),
        arms: vec![
            ExperimentArm {
                name: "strategic".into(),
                agent_x: strategic,
            },
            ExperimentArm {
                name: "naive".into(),
                agent_x: AgentConfig::of_kind(AgentKind::Naive),
            },
        ],
        n_matches,
        base_seed: 7,
    }
}

#[test]
fn criterion_6_strategic_agent_beats_naive() {
    check(6, "strategic agent beats naive, 100 matches per arm", (|| {
        let start = Instant::now();
        let spec = trap_game();
        let classifier = resolve_classifier(&spec.classifier).map_err(|e| e.to_string())?;
        let results = run_experiment(&spec, classifier.as_ref(), &trap_experiment(100), "test")
            .map_err(|e| e.to_string())?;
        let strategic = &results[0].summary;
        let naive = &results[1].summary;
        if strategic.wins <= naive.wins {
            return Err(format!(
                "strategic {} wins vs naive {}",
                strategic.wins, naive.wins
            ));
        }
        let p = fisher_exact_two_sided(strategic.wins, strategic.n, naive.wins, naive.n)
            .map_err(|e| e.to_string())?;
        if p >= 0.01 {
            return Err(format!("p = {p}, expected < 0.01"));
        }
        let elapsed = start.elapsed();
        if elapsed.as_secs() >= 60 {
            return Err(format!("took {elapsed:?}, expected under a minute"));
        }
        Ok(())
    })());
}

#[test]
fn criterion_7_experiments_replay_deterministically() {
    check(7, "records are reproducible and replayable", (|| {
        let spec = trap_game();
        let classifier = resolve_classifier(&spec.classifier).map_err(|e| e.to_string())?;
        let digest = spec_digest(&spec);
        let experiment = trap_experiment(20);
        let run = || run_experiment(&spec, classifier.as_ref(), &experiment, &digest);
        let a = run().map_err(|e| e.to_string())?;
        let b = run().map_err(|e| e.to_string())?;
        let flat = |r: &[verdict_core::harness::ArmResult]| -> Vec<_> {
            r.iter().flat_map(|arm| arm.records.iter().cloned()).collect()
        };
        let (ra, rb) = (flat(&a), flat(&b));
        if ra != rb {
            return Err("two identical runs produced different records".into());
        }
        for (i, record) in ra.iter().enumerate() {
            let ja = serde_json::to_string(record).map_err(|e| e.to_string())?;
            let jb = serde_json::to_string(&rb[i]).map_err(|e| e.to_string())?;
            if ja != jb {
                return Err(format!("record {i}: serialized forms differ"));
            }
            verify_record(&spec, record).map_err(|e| format!("record {i}: {e}"))?;
        }
        Ok(())
    })());
}

#[test]
fn criterion_8_belief_updates_match_hand_computed_posteriors() {
    check(8, "Bayes updates against frozen posteriors", (|| {
        // (prior, per-type likelihood of the observed move, posterior)
        let two = |g, n| vec![("Guilty".to_string(), g), ("Non-Guilty".to_string(), n)];
        let three = |a, b, c| {
            vec![
                ("a".to_string(), a),
                ("b".to_string(), b),
                ("c".to_string(), c),
            ]
        };
        let fixtures: Vec<(Vec<(String, f64)>, Vec<f64>, Vec<f64>)> = vec![
            (two(0.9, 0.1), vec![0.5, 0.5], vec![0.9, 0.1]),
            (two(0.5, 0.2), vec![0.3, 0.7], vec![0.51724137931034486, 0.48275862068965519]),
            (two(0.8, 0.4), vec![0.25, 0.75], vec![0.4, 0.6]),
            (two(0.0, 0.7), vec![0.5, 0.5], vec![0.0, 1.0]),
            (two(0.05, 0.95), vec![0.9, 0.1], vec![0.32142857142857145, 0.6785714285714286]),
            (
                three(0.1, 0.2, 0.3),
                vec![0.2, 0.3, 0.5],
                vec![0.086956521739130432, 0.2608695652173913, 0.65217391304347827],
            ),
            (
                three(0.6, 0.3, 0.1),
                vec![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
                vec![0.6, 0.3, 0.1],
            ),
            (three(0.5, 0.5, 0.5), vec![0.7, 0.2, 0.1], vec![0.7, 0.2, 0.1]),
            (two(1e-9, 2e-9), vec![0.6, 0.4], vec![0.42857142857142855, 0.5714285714285714]),
            (
                two(0.4, 0.6),
                vec![0.51724137931034486, 0.48275862068965519],
                vec![0.41666666666666669, 0.58333333333333337],
            ),
        ];
        let spec = builtin_game(BuiltinGame::Interrogation);
        for (i, (likelihoods, prior, want)) in fixtures.iter().enumerate() {
            let types: Vec<String> = likelihoods.iter().map(|(t, _)| t.clone()).collect();
            let belief = Belief::new(types.clone(), prior.clone())
                .map_err(|e| format!("fixture {i}: {e}"))?;
            let mut per_type = BTreeMap::new();
            for (t, l) in likelihoods {
                per_type.insert(t.clone(), vec![(utt(["m"]), *l)]);
            }
            let policy = TypedMovePolicy { per_type };
            let post = update_belief(&belief, &spec, &utt(["m"]), &policy)
                .map_err(|e| format!("fixture {i}: {e}"))?;
            let mass: f64 = post.probs().iter().sum();
            if (mass - 1.0).abs() > 1e-12 {
                return Err(format!("fixture {i}: posterior mass {mass}"));
            }
            for (j, (got, want)) in post.probs().iter().zip(want).enumerate() {
                if (got - want).abs() > 1e-12 {
                    return Err(format!(
                        "fixture {i}, type {j}: posterior {got}, want {want}"
                    ));
                }
            }
        }
        Ok(())
    })());
}

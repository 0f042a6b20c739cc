//! Seeded random tiny-game generator, used by the verification suites and
//! benchmarks: complete-information court games with random menus, random
//! stage caps and random small automaton classifiers, rejection-sampled so
//! the brute-force oracle stays within its profile cap.

use crate::classifier::{resolve_classifier, ClassifierSpec, Speaker, TransitionRule};
use crate::game::{builtin_game, BuiltinGame, GameSpec, MenuRule, Token, Utterance, Verdict};
use crate::solver::complete_info_profile_count;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy)]
pub struct RandomGameParams {
    pub max_menu: usize,
    pub max_stages: usize,
    pub max_states: usize,
    /// Games whose pure-profile count exceeds this are rejected and redrawn.
    pub profile_cap: u128,
}

impl Default for RandomGameParams {
    fn default() -> RandomGameParams {
        RandomGameParams {
            max_menu: 3,
            max_stages: 3,
            max_states: 5,
            profile_cap: 5_000,
        }
    }
}

/// Generate a random complete-information court game. Deterministic in
/// `seed`; draws until the instance fits under `profile_cap`.
pub fn random_court_game(seed: u64, params: RandomGameParams) -> GameSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let spec = draw(&mut rng, params);
        let classifier = resolve_classifier(&spec.classifier).expect("generated automaton");
        match complete_info_profile_count(&spec, classifier.as_ref()) {
            Ok(count) if count <= params.profile_cap => return spec,
            _ => continue,
        }
    }
}

fn draw(rng: &mut ChaCha8Rng, params: RandomGameParams) -> GameSpec {
    let mut spec = builtin_game(BuiltinGame::Court);
    spec.max_stages = rng.gen_range(1..=params.max_stages);
    let x_menu = rng.gen_range(1..=params.max_menu);
    let y_menu = rng.gen_range(1..=params.max_menu);
    let x_tokens: Vec<Token> = (0..x_menu)
        .map(|i| Token::new(format!("x{i}")).unwrap())
        .collect();
    let y_tokens: Vec<Token> = (0..y_menu)
        .map(|i| Token::new(format!("y{i}")).unwrap())
        .collect();
    spec.menus.x = vec![MenuRule::unconditional(
        x_tokens
            .iter()
            .map(|t| Utterance::new(vec![t.clone()]).unwrap())
            .collect(),
    )];
    spec.menus.y = vec![MenuRule::unconditional(
        y_tokens
            .iter()
            .map(|t| Utterance::new(vec![t.clone()]).unwrap())
            .collect(),
    )];

    let n_states = rng.gen_range(1..=params.max_states);
    let outputs = (0..n_states).map(|_| random_verdict(rng)).collect();
    let defaults = (0..n_states).map(|_| rng.gen_range(0..n_states)).collect();
    let mut transitions = Vec::new();
    for from in 0..n_states {
        for (speaker, tokens) in [(Speaker::X, &x_tokens), (Speaker::Y, &y_tokens)] {
            for token in tokens {
                transitions.push(TransitionRule {
                    from,
                    speaker,
                    token: token.clone(),
                    to: rng.gen_range(0..n_states),
                });
            }
        }
    }
    spec.classifier = ClassifierSpec::Automaton {
        start: 0,
        defaults,
        outputs,
        transitions,
    };
    spec.classifier_id = "random-automaton".into();
    spec.name = "random-court".into();
    spec
}

fn random_verdict(rng: &mut ChaCha8Rng) -> Verdict {
    // biased toward Cont so multi-stage games actually occur
    match rng.gen_range(0..10) {
        0..=5 => Verdict::Cont,
        6 | 7 => Verdict::Zero,
        _ => Verdict::One,
    }
}

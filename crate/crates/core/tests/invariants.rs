//! Property-based invariants over serialization, statistics, beliefs, and
//! the random game generator.

use proptest::prelude::*;
use verdict_core::classifier::resolve_classifier;
use verdict_core::game::{
    parse_transcript, ConversationState, SerializeStyle, Stage, Token, Utterance,
};
use verdict_core::harness::stats::fisher_exact_two_sided;
use verdict_core::llm::sanitize_reply;
use verdict_core::solver::randgen::{random_court_game, RandomGameParams};
use verdict_core::solver::{solve_backward_induction, Belief};

fn token_strategy() -> impl Strategy<Value = Token> {
    "[a-z]{1,6}".prop_map(|s| Token::new(s).unwrap())
}

fn utterance_strategy() -> impl Strategy<Value = Utterance> {
    prop::collection::vec(token_strategy(), 1..4).prop_map(|t| Utterance::new(t).unwrap())
}

fn state_strategy() -> impl Strategy<Value = ConversationState> {
    (
        prop::collection::vec(token_strategy(), 0..3),
        prop::collection::vec((utterance_strategy(), utterance_strategy()), 0..4),
    )
        .prop_map(|(seed, stages)| {
            let mut state = ConversationState::new(seed);
            for (x, y) in stages {
                state.stages.push(Stage {
                    x_move: x,
                    y_move: y,
                });
                state
                    .verdict_history
                    .push(verdict_core::game::Verdict::Cont);
            }
            state
        })
}

proptest! {
    #[test]
    fn transcripts_round_trip_in_both_styles(state in state_strategy()) {
        for style in [SerializeStyle::Delimiters, SerializeStyle::SpeakerLabels] {
            let text = state.serialize(style);
            let parsed = parse_transcript(&text, style).unwrap();
            prop_assert_eq!(parsed.serialize(style), text);
            prop_assert_eq!(parsed, state.transcript());
        }
    }

    #[test]
    fn fisher_p_is_a_symmetric_probability(
        a_w in 0u64..=40, a_extra in 0u64..=40,
        b_w in 0u64..=40, b_extra in 0u64..=40,
    ) {
        let (a_n, b_n) = (a_w + a_extra, b_w + b_extra);
        prop_assume!(a_n > 0 && b_n > 0);
        let p = fisher_exact_two_sided(a_w, a_n, b_w, b_n).unwrap();
        prop_assert!(p > 0.0 && p <= 1.0, "p = {}", p);
        let q = fisher_exact_two_sided(b_w, b_n, a_w, a_n).unwrap();
        prop_assert!((p - q).abs() < 1e-12, "asymmetric: {} vs {}", p, q);
    }

    #[test]
    fn belief_sampling_stays_in_support(probs in prop::collection::vec(0.01f64..1.0, 2..5), seed in any::<u64>()) {
        use rand::SeedableRng;
        let total: f64 = probs.iter().sum();
        let probs: Vec<f64> = probs.iter().map(|p| p / total).collect();
        let types: Vec<String> = (0..probs.len()).map(|i| format!("t{i}")).collect();
        prop_assume!((probs.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        let belief = Belief::new(types.clone(), probs).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            let t = belief.sample(&mut rng).to_string();
            prop_assert!(types.contains(&t));
        }
    }

    #[test]
    fn sanitized_replies_are_legal_moves(reply in ".{0,80}", cap in 1usize..8) {
        if let Some((utterance, truncated)) = sanitize_reply(&reply, cap) {
            prop_assert!(utterance.tokens().len() <= cap);
            prop_assert!(!truncated || reply.split_whitespace().count() > cap);
            let text = utterance.text();
            prop_assert!(!text.contains('#') && !text.contains('@'));
        }
    }

    #[test]
    fn random_games_have_bounded_court_values(seed in any::<u64>()) {
        let spec = random_court_game(seed, RandomGameParams::default());
        let classifier = resolve_classifier(&spec.classifier).unwrap();
        let result =
            solve_backward_induction(&spec, classifier.as_ref(), Default::default()).unwrap();
        // court payoffs live in {-1, 1}
        prop_assert!(result.expected_x_value.abs() <= 1.0 + 1e-12);
        for v in &result.root_values {
            prop_assert!((v.x + v.y).abs() < 1e-12, "not zero-sum: {:?}", v);
        }
    }
}

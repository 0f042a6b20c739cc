//! The three built-in verdict games: court, interrogation, and the Turing
//! test (interrogation under the Human/Machine relabeling). Menus, classifier
//! and seed text are left as configurable slots; the built-ins pin the type
//! sets and utility tables.

use super::{GameError, GameSpec, MenuTable, Player, UtilityRow, UtilityTable};
use crate::classifier::ClassifierSpec;
use crate::game::Verdict;
use std::collections::BTreeSet;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuiltinGame {
    Court,
    Interrogation,
    Turing,
}

impl FromStr for BuiltinGame {
    type Err = GameError;
    fn from_str(s: &str) -> Result<BuiltinGame, GameError> {
        match s {
            "court" => Ok(BuiltinGame::Court),
            "interrogation" => Ok(BuiltinGame::Interrogation),
            "turing" => Ok(BuiltinGame::Turing),
            other => Err(GameError::UnknownBuiltin(other.to_string())),
        }
    }
}

pub fn builtin_game(which: BuiltinGame) -> GameSpec {
    match which {
        BuiltinGame::Court => court(),
        BuiltinGame::Interrogation => interrogation("Guilty", "Non-Guilty", "interrogation"),
        // Machine plays the Guilty role, Human the Non-Guilty one; verdict
        // Zero means "judged human", One means "judged machine".
        BuiltinGame::Turing => interrogation("Machine", "Human", "turing"),
    }
}

fn base(name: &str) -> GameSpec {
    GameSpec {
        name: name.to_string(),
        alphabet: BTreeSet::new(),
        max_utterance_len: 16,
        max_stages: 3,
        x_types: Vec::new(),
        y_types: Vec::new(),
        prior_y: Vec::new(),
        prior_x: None,
        utilities: UtilityTable::default(),
        classifier_id: "default".to_string(),
        classifier: ClassifierSpec::Constant {
            verdict: Verdict::Cont,
        },
        menus: MenuTable::default(),
        seed_text: Vec::new(),
    }
}

/// Zero-sum prosecution/defence game. Verdict Zero is exoneration, One is a
/// guilty verdict. The prosecution loses a non-conclusive outcome
/// (presumption of innocence), so u_X(Cont) = -1 and u_Y(Cont) = 1.
fn court() -> GameSpec {
    let mut spec = base("court");
    spec.x_types = vec!["Prosecutor".to_string()];
    spec.y_types = vec!["Defence".to_string()];
    spec.prior_y = vec![1.0];
    spec.utilities = UtilityTable::new(vec![
        UtilityRow {
            player: Player::X,
            t_x: "Prosecutor".into(),
            t_y: "Defence".into(),
            zero: -1.0,
            one: 1.0,
            cont: -1.0,
        },
        UtilityRow {
            player: Player::Y,
            t_x: "Prosecutor".into(),
            t_y: "Defence".into(),
            zero: 1.0,
            one: -1.0,
            cont: 1.0,
        },
    ]);
    spec
}

/// Interrogator vs suspect of hidden type. The interrogator is scored like a
/// classifier (right verdict +1, wrong -1, undecided 0); the suspect wants
/// exoneration whatever his type, and also profits from stalling.
fn interrogation(guilty_label: &str, innocent_label: &str, name: &str) -> GameSpec {
    let mut spec = base(name);
    let t_x = "Interrogator".to_string();
    spec.x_types = vec![t_x.clone()];
    spec.y_types = vec![guilty_label.to_string(), innocent_label.to_string()];
    spec.prior_y = vec![0.5, 0.5];
    let mut rows = Vec::new();
    for (t_y, x_zero, x_one) in [
        (innocent_label, 1.0, -1.0),
        (guilty_label, -1.0, 1.0),
    ] {
        rows.push(UtilityRow {
            player: Player::X,
            t_x: t_x.clone(),
            t_y: t_y.to_string(),
            zero: x_zero,
            one: x_one,
            cont: 0.0,
        });
        rows.push(UtilityRow {
            player: Player::Y,
            t_x: t_x.clone(),
            t_y: t_y.to_string(),
            zero: 1.0,
            one: -1.0,
            cont: 1.0,
        });
    }
    spec.utilities = UtilityTable::new(rows);
    spec
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::Verdict;

    #[test]
    fn court_is_zero_sum() {
        let spec = builtin_game(BuiltinGame::Court);
        for v in [Verdict::Zero, Verdict::One, Verdict::Cont] {
            let x = spec.payoff(Player::X, "Prosecutor", "Defence", v).unwrap();
            let y = spec.payoff(Player::Y, "Prosecutor", "Defence", v).unwrap();
            assert_eq!(x + y, 0.0, "verdict {v}");
        }
        assert_eq!(
            spec.payoff(Player::X, "Prosecutor", "Defence", Verdict::One)
                .unwrap(),
            1.0
        );
        assert_eq!(
            spec.payoff(Player::X, "Prosecutor", "Defence", Verdict::Cont)
                .unwrap(),
            -1.0
        );
    }

    #[test]
    fn interrogation_matches_utility_table() {
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
            assert_eq!(
                spec.payoff(player, "Interrogator", t_y, v).unwrap(),
                want,
                "{player} {t_y} {v}"
            );
        }
    }

    #[test]
    fn turing_is_interrogation_relabeled() {
        let turing = builtin_game(BuiltinGame::Turing);
        assert_eq!(
            turing
                .payoff(Player::X, "Interrogator", "Human", Verdict::Zero)
                .unwrap(),
            1.0
        );
        let inter = builtin_game(BuiltinGame::Interrogation);
        let relabel = |t: &str| match t {
            "Human" => "Non-Guilty".to_string(),
            "Machine" => "Guilty".to_string(),
            other => other.to_string(),
        };
        for t_y in &turing.y_types {
            for player in [Player::X, Player::Y] {
                for v in [Verdict::Zero, Verdict::One, Verdict::Cont] {
                    assert_eq!(
                        turing.payoff(player, "Interrogator", t_y, v).unwrap(),
                        inter
                            .payoff(player, "Interrogator", &relabel(t_y), v)
                            .unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn unknown_builtin_name_errors() {
        assert!(matches!(
            "poker".parse::<BuiltinGame>(),
            Err(GameError::UnknownBuiltin(_))
        ));
    }
}

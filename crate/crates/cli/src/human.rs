//! Interactive seat: shows the transcript, prompts for a menu index or free
//! text, re-prompts on bad input. `quit` or EOF aborts the session cleanly.

use std::io::{BufRead, Write};
use verdict_core::agent::{Agent, AgentError, MoveContext};
use verdict_core::game::{GameError, SerializeStyle, Utterance};

pub const ABORT_MESSAGE: &str = "aborted by player";

pub struct HumanAgent {
    id: String,
}

impl HumanAgent {
    pub fn new() -> HumanAgent {
        HumanAgent { id: "human".into() }
    }
}

impl Agent for HumanAgent {
    fn id(&self) -> &str {
        &self.id
    }

    fn is_deterministic(&self) -> bool {
        false
    }

    fn choose(&mut self, ctx: &MoveContext<'_>) -> Result<Utterance, AgentError> {
        let transcript = ctx.state.serialize(SerializeStyle::SpeakerLabels);
        println!("\n--- conversation ---");
        if transcript.is_empty() {
            println!("(empty)");
        } else {
            println!("{transcript}");
        }
        if let Some(v) = ctx.state.verdict_history.last() {
            println!("last verdict: {v:?}");
        }
        println!("you are {} ({})", ctx.mover, ctx.mover_type);

        // empty menus mean free-text play
        let menu = match ctx
            .spec
            .legal_moves(ctx.state, ctx.mover, Some(ctx.mover_type))
        {
            Ok(moves) => Some(moves),
            Err(GameError::EmptyMenu { .. }) => None,
            Err(e) => return Err(e.into()),
        };
        if let Some(menu) = &menu {
            println!("moves:");
            for (i, mv) in menu.iter().enumerate() {
                println!("  [{}] {}", i + 1, mv.text());
            }
        }

        let stdin = std::io::stdin();
        let mut lines = stdin.lock().lines();
        loop {
            match &menu {
                Some(m) => print!("move [1-{}], free text, or 'quit': ", m.len()),
                None => print!("your message (or 'quit'): "),
            }
            let _ = std::io::stdout().flush();
            let line = match lines.next() {
                Some(Ok(line)) => line,
                // EOF or a broken terminal: clean abort
                _ => return Err(AgentError::Generator(ABORT_MESSAGE.into())),
            };
            let input = line.trim();
            if input.is_empty() {
                continue;
            }
            if input.eq_ignore_ascii_case("quit") {
                return Err(AgentError::Generator(ABORT_MESSAGE.into()));
            }
            if let Some(menu) = &menu {
                if let Ok(i) = input.parse::<usize>() {
                    if (1..=menu.len()).contains(&i) {
                        return Ok(menu[i - 1].clone());
                    }
                    println!("out of range");
                    continue;
                }
            }
            match Utterance::parse(input) {
                Ok(utterance) => {
                    if let Err(e) = ctx.spec.check_utterance(&utterance) {
                        println!("illegal move: {e}");
                        continue;
                    }
                    match &menu {
                        Some(menu) if !menu.contains(&utterance) => {
                            println!("not on the menu");
                            continue;
                        }
                        _ => return Ok(utterance),
                    }
                }
                Err(e) => {
                    println!("cannot parse move: {e}");
                    continue;
                }
            }
        }
    }
}

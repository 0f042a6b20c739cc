//! Summary output shared by `simulate`, `analyze` and `replicate-court`, so
//! recomputing from persisted records prints the identical table.

use verdict_core::harness::stats::fisher_exact_two_sided;
use verdict_core::harness::ArmSummary;

pub fn print_summaries(summaries: &[ArmSummary]) {
    println!(
        "{:<16} {:>5} {:>5} {:>6} {:>14} {:>8} {:>8}",
        "arm", "n", "wins", "losses", "non_conclusive", "excluded", "win_rate"
    );
    for s in summaries {
        println!(
            "{:<16} {:>5} {:>5} {:>6} {:>14} {:>8} {:>8.3}",
            s.name, s.n, s.wins, s.losses, s.non_conclusive, s.excluded, s.win_rate
        );
    }
    let Some(first) = summaries.first() else {
        println!("(no records)");
        return;
    };
    for other in &summaries[1..] {
        match fisher_exact_two_sided(first.wins, first.n, other.wins, other.n) {
            Ok(p) => println!(
                "fisher_exact p ({} vs {}): {:e}",
                first.name, other.name, p
            ),
            Err(e) => println!(
                "fisher_exact p ({} vs {}): unavailable ({e})",
                first.name, other.name
            ),
        }
    }
}

//! The three-student report games: raw Shapley values, the closure repair, and the two-player case.

use metashap::game::{demos, dominance, is_superadditive, monotone_modify, shapley_by_permutations, shapley_values};
use metashap::game::{CooperativeGame, DEFAULT_TIE_TOL};

fn show(title: &str, game: &CooperativeGame) -> metashap::Result<()> {
    let r = shapley_values(game, DEFAULT_TIE_TOL)?;
    let check = shapley_by_permutations(game, DEFAULT_TIE_TOL)?;
    let sa = is_superadditive(game);
    println!("{title} (superadditive: {}, {} violating pairs)", sa.superadditive, sa.violations.len());
    for (i, name) in r.players.iter().enumerate() {
        let pct = r.dominance_pct.as_ref().map_or(String::from("-"), |d| format!("{:.2}%", d[i]));
        println!("  {name:<3} {:>8.3} {pct:>8}   (permutations: {:.3})", r.values[i], check.values[i]);
    }
    println!("  dominance: {:?}\n", dominance(&r));
    Ok(())
}

fn main() -> metashap::Result<()> {
    show("report writing", &demos::report_writing())?;
    let slow = demos::non_superadditive();
    show("Alice slows every group", &slow)?;
    show("after monotone closure", &monotone_modify(&slow))?;
    show("Bill and Charlie", &demos::two_player())?;
    Ok(())
}

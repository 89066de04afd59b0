//! Corrector cascade up to order 4 with the word-sum cross-check.

use wavehom::cascade::{cascade_solver_options, compute_correctors, level_difference, word_sum_oracle};
use wavehom::torus::media;

fn main() -> wavehom::Result<()> {
    let c = media::named("two_phase(1,4,0.5,0.1)", 1, 128)?;
    let table = compute_correctors(&c, 4)?;
    for k in 1..=4 {
        let words = word_sum_oracle(&c, k, cascade_solver_options())?;
        println!("level {k}: {} entries, recursion vs word sums {:.2e}", table.level(k).len(), level_difference(&words, table.level(k)));
        for (beta, f) in table.level(k) {
            println!("  chi_{k}[{beta}]  L2 norm {:.4e}", f.norm());
        }
    }
    Ok(())
}

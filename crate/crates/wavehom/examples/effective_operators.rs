//! Higher-order effective operators a*_n and the vanishing of odd orders.

use wavehom::cascade::compute_correctors;
use wavehom::operators::{a_star_series, odd_operator_ratio};
use wavehom::torus::media;

fn main() -> wavehom::Result<()> {
    let c = media::named("two_phase(1,4,0.5,0.1)", 1, 128)?;
    let table = compute_correctors(&c, 5)?;
    let series = a_star_series(&c, &table, 6)?;
    for (i, p) in series.iter().enumerate() {
        println!("a*_{} = {p}", i + 2);
    }
    println!("odd operators relative to the matched scale: {:.2e}", odd_operator_ratio(&series));
    for seed in 1..=3 {
        let r = media::random_smooth(2, 16, seed, true)?;
        let t = compute_correctors(&r, 3)?;
        println!("d = 2 seed {seed}: odd ratio {:.2e}", odd_operator_ratio(&a_star_series(&r, &t, 4)?));
    }
    Ok(())
}

//! Classical hierarchy: profiles u_0, u_2, u_4 and their secular growth.

use wavehom::cascade::compute_correctors;
use wavehom::classical::{measure_secular_growth, solve_hierarchy};
use wavehom::operators::a_star_series;
use wavehom::source::SourceTerm;
use wavehom::spectral::BoxDomain;
use wavehom::torus::{media, MultiIndex};

fn main() -> wavehom::Result<()> {
    let c = media::named("two_phase(1,4,0.5,0.1)", 1, 128)?;
    let table = compute_correctors(&c, 6)?;
    let series = a_star_series(&c, &table, 6)?;
    let src = SourceTerm::default_with_width(1.0);
    let t_end = 320.0;
    let exp = solve_hierarchy(&series, &src, 2, &BoxDomain::new(960.0, t_end), 1e-3)?;
    println!("hierarchy defect at t = 5: {:.2e}", exp.defect(5.0)?);
    let dx = MultiIndex::new(0, &[1]);
    for level in 0..=2 {
        let g = measure_secular_growth(&exp, level, &dx, (20.0, t_end), 9)?;
        println!("||d_x pi u_{}||: slope {:.3} +- {:.3}", 2 * level, g.fit.slope, g.fit.slope_half_width);
        for (t, n) in g.times.iter().zip(&g.norms) {
            println!("  t = {t:8.2}  {n:.5e}");
        }
    }
    Ok(())
}

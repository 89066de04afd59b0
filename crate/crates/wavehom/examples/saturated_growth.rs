//! Constant-density medium: closed-form pi u_2 from the d'Alembert split of pi u_0
//! and the truncated sup norm beyond t = eps^-2.

use wavehom::cascade::compute_correctors;
use wavehom::classical::{dalembert_split, solve_hierarchy, SaturatedGrowth};
use wavehom::operators::a_star_series;
use wavehom::source::SourceTerm;
use wavehom::spectral::BoxDomain;
use wavehom::torus::media;

fn main() -> wavehom::Result<()> {
    let c = media::named("two_phase(1,4,0.5,0.1)", 1, 128)?;
    let table = compute_correctors(&c, 4)?;
    let series = a_star_series(&c, &table, 4)?;
    let sat = SaturatedGrowth::from_series(&series)?;
    println!("c = {:.5}, gamma = {:.5e}, kappa = {:.5e}", sat.c, sat.gamma, sat.kappa());
    let src = SourceTerm::default_with_width(0.5);
    let exp = solve_hierarchy(&series, &src, 0, &BoxDomain::new(64.0, 4.0), 1e-3)?;
    let split = dalembert_split(exp.profile(0), sat.c, 2.0)?;
    for eps in [0.25, 0.125, 0.0625] {
        let t = f64::powf(eps, -2.5);
        println!("eps = {eps}: t = {t:.1}, sup |truncated ansatz| = {:.6}", split.truncated_sup_norm(&sat, eps, t, 2, 4096)?);
    }
    Ok(())
}

//! Filtered dispersive symbol, its stability threshold and the criminal approximation.

use wavehom::cascade::compute_correctors;
use wavehom::dispersive::{assemble_criminal, build_symbol, solve_filtered, stability_threshold};
use wavehom::filter::{Cutoff, FilterSpec};
use wavehom::normal_form::compute_normal_form;
use wavehom::operators::a_star_series;
use wavehom::source::SourceTerm;
use wavehom::spectral::BoxDomain;
use wavehom::torus::media;

fn main() -> wavehom::Result<()> {
    let c = media::named("two_phase(1,4,0.5,0.1)", 1, 128)?;
    let k = 2;
    let table = compute_correctors(&c, 2 * k + 2)?;
    let series = a_star_series(&c, &table, 2 * k + 2)?;
    let nf = compute_normal_form(&series, k)?;
    let filter = FilterSpec::new(0.8, Cutoff::new(3.0, 4.0), Cutoff::new(5.0, 6.0))?;
    let eps0 = stability_threshold(&nf, &filter);
    let eps = 0.0625;
    let sym = build_symbol(&nf, eps, &filter)?;
    println!("eps0 = {eps0:.4}");
    println!("{:>8} {:>12} {:>12} {:>12}", "xi", "homogenized", "unfiltered", "mu");
    for i in 1..=12 {
        let xi = 2.0 * i as f64;
        println!("{xi:8.2} {:12.4} {:12.4} {:12.4}", sym.homogenized(&[xi]), sym.unfiltered(&[xi]), sym.mu(&[xi]));
    }
    let src = SourceTerm::default_with_width(1.0);
    let v = solve_filtered(&nf, eps, &filter, &src, &BoxDomain::new(80.0, 20.0), 1e-3)?;
    let u = assemble_criminal(&v, &table, eps, k)?;
    for x in [0.0, 24.0, 26.0, 28.0, 30.0, 32.0] {
        let [val, ut, ux] = u.sample(20.0, x)?;
        println!("t = 20, x = {x:6.1}: u = {val:.6e}, u_t = {ut:.6e}, u_x = {ux:.6e}");
    }
    Ok(())
}

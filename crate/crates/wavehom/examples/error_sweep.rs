//! Energy errors of the classical and criminal approximations against the Bloch
//! reference over a short eps sweep, written as CSV.

use wavehom::cascade::compute_correctors;
use wavehom::classical::{assemble_classical, solve_hierarchy};
use wavehom::dispersive::{assemble_criminal, solve_filtered};
use wavehom::filter::{Cutoff, FilterSpec};
use wavehom::harness::CSV_HEADER;
use wavehom::normal_form::compute_normal_form;
use wavehom::operators::a_star_series;
use wavehom::reference::{energy_error, BlochReference, BlochSettings};
use wavehom::source::SourceTerm;
use wavehom::spectral::BoxDomain;
use wavehom::torus::media;

fn main() -> wavehom::Result<()> {
    let c = media::named("two_phase(1,4,0.5,0.1)", 1, 128)?;
    let table = compute_correctors(&c, 6)?;
    let series = a_star_series(&c, &table, 6)?;
    let nf = compute_normal_form(&series, 2)?;
    let filter = FilterSpec::new(0.8, Cutoff::new(3.0, 4.0), Cutoff::new(5.0, 6.0))?;
    let src = SourceTerm::default_with_width(1.0);
    let t = 5.0;
    let domain = BoxDomain::new(40.0, t);
    let classical = solve_hierarchy(&series, &src, 1, &domain, 1e-3)?;
    println!("{CSV_HEADER}");
    for eps in [0.25, 0.125, 0.0625] {
        let bloch = BlochReference::solve(&c, eps, &src, &domain, &BlochSettings::default())?;
        let u_cl = assemble_classical(&classical, &table, eps)?;
        let u_cr = assemble_criminal(&solve_filtered(&nf, eps, &filter, &src, &domain, 1e-3)?, &table, eps, 2)?;
        for (name, u) in [("classical", &u_cl), ("criminal", &u_cr)] {
            let e = energy_error(&bloch, u, t)?;
            println!("{eps},{t},{name},{:.6e},{:.6e}", e.energy, e.l2);
        }
    }
    Ok(())
}

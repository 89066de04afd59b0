//! Elimination of time derivatives: multipliers R_2j, space-only operators a~_2j
//! and the product identities they satisfy.

use wavehom::cascade::compute_correctors;
use wavehom::normal_form::{compute_normal_form, invert_r_series, verify_inverse, verify_inverse_reduction, verify_reduction};
use wavehom::operators::a_star_series;
use wavehom::torus::media;

fn main() -> wavehom::Result<()> {
    let c = media::named("two_phase(1,4,0.5,0.1)", 1, 128)?;
    let k = 3;
    let table = compute_correctors(&c, 2 * k + 1)?;
    let series = a_star_series(&c, &table, 2 * k + 2)?;
    let nf = compute_normal_form(&series, k)?;
    print!("{}", nf.dump());
    let rt = invert_r_series(&nf);
    println!("reduction residual         {:.2e}", verify_reduction(&nf, &series, 1e-11).max_relative());
    println!("inverse residual           {:.2e}", verify_inverse(&nf, &rt, 1e-11).max_relative());
    println!("inverse reduction residual {:.2e}", verify_inverse_reduction(&nf, &rt, &series, 1e-11).max_relative());
    Ok(())
}

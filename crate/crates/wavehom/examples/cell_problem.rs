//! Effective tensors of a few media and a direct cell solve.

use std::f64::consts::PI;
use wavehom::cascade::compute_correctors;
use wavehom::operators::{compute_a_star, effective_tensor, rho_bar};
use wavehom::torus::{media, PeriodicField, SolverOptions};

fn main() -> wavehom::Result<()> {
    for spec in ["constant(2)", "two_phase(1,4,0.5,0.1)", "smooth_sine(0.5)", "random_smooth(7)"] {
        let c = media::named(spec, 1, 128)?;
        let table = compute_correctors(&c, 1)?;
        let a2 = compute_a_star(&c, &table, 2)?;
        let a = c.a(0, 0).samples();
        let harmonic = a.len() as f64 / a.iter().map(|v| 1.0 / v).sum::<f64>();
        println!("{spec:28} abar = {:.6}  grid harmonic mean = {harmonic:.6}  rho_bar = {:.4}", effective_tensor(&a2)[0][0], rho_bar(&a2));
    }

    let c = media::named("random_smooth(3)", 2, 32)?;
    let table = compute_correctors(&c, 1)?;
    let t = effective_tensor(&compute_a_star(&c, &table, 2)?);
    println!("d = 2 random medium: abar = [[{:.5}, {:.5}], [{:.5}, {:.5}]]", t[0][0], t[0][1], t[1][0], t[1][1]);

    // div(a grad u) = -(2 pi)^2 sin(2 pi y) for a = 1 has u = sin(2 pi y).
    let unit = media::named("constant(1)", 1, 64)?;
    let rhs = PeriodicField::from_fn(1, 64, |y| -(2.0 * PI).powi(2) * (2.0 * PI * y[0]).sin());
    let u = unit.solve_cell(&rhs, SolverOptions::default())?;
    let err = (0..64).map(|i| (u.samples()[i] - (2.0 * PI * i as f64 / 64.0).sin()).abs()).fold(0.0, f64::max);
    println!("cell solve error against sin(2 pi y): {err:.2e}");
    Ok(())
}

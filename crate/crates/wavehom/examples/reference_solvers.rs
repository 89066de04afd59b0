//! Bloch and leapfrog references for the oscillating equation and their agreement.

use wavehom::reference::{snapshot_error, BlochReference, BlochSettings, LeapfrogReference, LeapfrogSettings, Reference};
use wavehom::source::SourceTerm;
use wavehom::spectral::BoxDomain;
use wavehom::torus::media;

fn main() -> wavehom::Result<()> {
    let c = media::named("two_phase(1,4,0.5,0.1)", 1, 128)?;
    let (eps, t) = (0.125, 6.0);
    let src = SourceTerm::default_with_width(1.0);
    let domain = BoxDomain::new(48.0, t);
    let bloch = BlochReference::solve(&c, eps, &src, &domain, &BlochSettings::default())?;
    println!("Bloch: {} fibers, {} modes", bloch.fiber_count(), bloch.mode_count());
    let exact = bloch.snapshot(t, 2)?;
    for ppp in [16, 32, 64] {
        let lf = LeapfrogReference::solve(&c, eps, &src, &domain, &LeapfrogSettings { points_per_period: ppp, cfl: 0.9 }, &[t])?;
        let e = snapshot_error(&exact, &lf.snapshot(t, 2)?)?;
        println!("leapfrog {ppp:3} points per period: {} steps, energy error {:.3e}, drift {:.2e}", lf.steps, e.energy, lf.energy_drift);
    }
    Ok(())
}

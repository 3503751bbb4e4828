//! The random-interval description of a single Poisson count: commonality,
//! singleton plausibility and direct interval draws.

use dsplim::poisson_dsm::ARandomIntervalLaw;
use dsplim::sampling::RngHandle;

fn main() -> dsplim::Result<()> {
    let law = ARandomIntervalLaw::unscaled(4);
    let mut rng = RngHandle::new(7, 0);
    let draws: Vec<(f64, f64)> = (0..200_000).map(|_| law.sample_interval(&mut rng)).collect();

    println!("{:>6} {:>12} {:>12}", "lambda", "Pl exact", "Pl sampled");
    for lam in [1.0, 2.0, 3.0, 4.0, 6.0, 9.0] {
        let hit = draws.iter().filter(|(lo, hi)| *lo <= lam && lam <= *hi).count() as f64 / draws.len() as f64;
        println!("{lam:>6} {:>12.6} {:>12.6}", law.singleton_plausibility(lam)?, hit);
    }
    println!("Q([2, 5]) = {:.6}", law.commonality(2.0, 5.0)?);

    // 10 counts over an exposure of 33 describe a rate near 0.3
    let bg = ARandomIntervalLaw::with_exposure(10, 33.0)?;
    println!("background Pl(0.3) = {:.6}", bg.singleton_plausibility(0.3)?);
    Ok(())
}

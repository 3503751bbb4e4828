//! Bayesian limits under the four prior presets next to the DS limit.

use dsplim::bayes::{bayes_upper_limits, PriorConfig};
use dsplim::ds_limits::{CdfRoute, ChannelObservation, Dataset, DsConfig};

fn main() -> dsplim::Result<()> {
    let qs = [0.9, 0.99];
    let cfg = DsConfig::default();
    for (n, y, z) in [(0, 99, 100), (5, 99, 100), (12, 80, 110), (30, 120, 95)] {
        let ch = ChannelObservation::new(n, y, z, 33.0, 100.0)?;
        print!("n={n:>2} y={y:>3} z={z:>3}  DS {:>7.3}", cfg.upper_limits(&Dataset::single(ch), &qs)?[0]);
        for prior in PriorConfig::presets() {
            let l = bayes_upper_limits(&ch, &prior, &qs, CdfRoute::default())?;
            print!("  {} {:>7.3}", prior.name, l[0]);
        }
        println!();
    }
    Ok(())
}

//! Posterior credibility of DS and Bayesian limits under gamma priors on
//! the nuisance parameters.

use dsplim::bayes::{bayes_upper_limits, PriorConfig};
use dsplim::ds_limits::{CdfRoute, ChannelObservation, Dataset, DsConfig};
use dsplim::evalharness::{credibility_curve, reference_upper_limit, CredibilityConfig};
use dsplim::sampling::RngHandle;

fn main() -> dsplim::Result<()> {
    let cfg = CredibilityConfig::task1a();
    let qs = [0.9, 0.99];
    let mut rng = RngHandle::new(3, 0);
    for (n, y, z) in [(2, 99, 100), (8, 95, 104), (25, 101, 97)] {
        let ch = ChannelObservation::new(n, y, z, 33.0, 100.0)?;
        let rows = [
            ("DS", DsConfig::default().upper_limits(&Dataset::single(ch), &qs)?),
            ("B1", bayes_upper_limits(&ch, &PriorConfig::b1(), &qs, CdfRoute::default())?),
            ("reference", qs.iter().map(|&q| reference_upper_limit(&ch, &cfg, q)).collect::<dsplim::Result<_>>()?),
        ];
        println!("n={n} y={y} z={z}");
        for (name, limits) in rows {
            let cred = credibility_curve(&limits, &ch, &cfg, 50_000, &mut rng)?;
            println!(
                "  {name:<9} limits {:>7.3} {:>7.3}  credibility {:.4} {:.4}",
                limits[0], limits[1], cred[0].value, cred[1].value
            );
        }
    }
    Ok(())
}

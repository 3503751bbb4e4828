//! Per-channel lower/upper CDFs and commonality on a shared grid, then the
//! combined plausibility density.

use dsplim::ds_limits::{
    channel_curves_on, combine_channels, dataset_grid, upper_limit, CdfRoute, ChannelModel, ChannelObservation,
    GridConfig,
};

fn main() -> dsplim::Result<()> {
    let grid = GridConfig { points: 64, ..GridConfig::default() };
    let models = [
        ChannelModel::new(ChannelObservation::new(5, 10, 100, 33.0, 100.0)?, CdfRoute::default())?,
        ChannelModel::new(ChannelObservation::new(3, 2, 20, 3.3, 10.0)?, CdfRoute::default())?,
    ];
    let xs = dataset_grid(&models, &grid)?;
    let curves = models.iter().map(|m| channel_curves_on(m, &xs)).collect::<dsplim::Result<Vec<_>>>()?;

    let a = &curves[0];
    println!("{:>10} {:>10} {:>10} {:>10}", "x", "F_lower", "F_upper", "r");
    for i in (0..xs.len()).step_by(6) {
        println!("{:>10.4} {:>10.6} {:>10.6} {:>10.6}", xs[i], a.f_lower[i], a.f_upper[i], a.r[i]);
    }

    let density = combine_channels(&curves, &grid)?;
    println!("normalization {:.6e}", density.normalization);
    for q in [0.9, 0.99] {
        println!("{q} limit {:.4}", upper_limit(&density, q)?);
    }
    Ok(())
}

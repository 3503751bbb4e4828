//! DS upper limits for a single channel and for a combined search.

use dsplim::ds_limits::{ChannelObservation, Dataset, DsConfig};

fn main() -> dsplim::Result<()> {
    let cfg = DsConfig::default();
    let qs = [0.9, 0.95, 0.99];

    // 5 events, 10 sideband counts at t = 33, 100 calibration counts at u = 100
    let one = Dataset::single(ChannelObservation::new(5, 10, 100, 33.0, 100.0)?);
    println!("single channel: {:?}", cfg.upper_limits(&one, &qs)?);

    let channels = vec![
        ChannelObservation::new(5, 10, 100, 33.0, 100.0)?,
        ChannelObservation::new(2, 1, 12, 3.3, 10.0)?,
        ChannelObservation::new(0, 4, 30, 3.3, 10.0)?,
    ];
    let combined = Dataset::new(channels, "three channels")?;
    println!("{}: {:?}", combined.label, cfg.upper_limits(&combined, &qs)?);

    // one calibration count leaves a heavy tail with no finite limit
    let weak = Dataset::single(ChannelObservation::new(3, 0, 1, 1.0, 10.0)?);
    println!("z = 1: {:?}", cfg.upper_limits(&weak, &qs)?);
    Ok(())
}

//! Coverage study on simulated datasets for DS and the four priors.
//!
//! `cargo run --release --example simulation_study -- 500` sets the number
//! of datasets per s (default 200).

use dsplim::bayes::PriorConfig;
use dsplim::evalharness::{simulate_study, BayesMethod, DsMethod, LimitMethod, StudyConfig};

fn main() -> dsplim::Result<()> {
    let reps = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(200);
    let cfg = StudyConfig { reps, s_grid: (20..=40).step_by(2).map(f64::from).collect(), ..StudyConfig::full_scale() };
    let ds = DsMethod::default();
    let bayes: Vec<BayesMethod> = PriorConfig::presets().into_iter().map(BayesMethod::new).collect();
    let mut methods: Vec<&dyn LimitMethod> = vec![&ds];
    methods.extend(bayes.iter().map(|b| b as &dyn LimitMethod));

    let table = simulate_study(&cfg, &methods)?;
    println!("{:<8} {:>6} {:>8} {:>8}", "method", "level", "mean", "sd");
    for r in &table.summary {
        println!("{:<8} {:>6} {:>8.4} {:>8.4}", r.method, r.level, r.mean, r.stdev);
    }
    Ok(())
}

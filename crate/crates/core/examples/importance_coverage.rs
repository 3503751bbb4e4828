//! Coverage curve from one importance-sampled set of datasets, checked
//! against enumeration.

use dsplim::bayes::PriorConfig;
use dsplim::evalharness::{coverage_enumerate, coverage_importance, BayesMethod, CoverageProblem, EnumerationConfig};

fn main() -> dsplim::Result<()> {
    let method = BayesMethod::new(PriorConfig::b2());
    let problem = CoverageProblem::task1a(0.9);
    let grid = [4.0, 8.0, 12.0, 16.0];
    let is = coverage_importance(&method, &problem, &grid, 20_000, 10.0, 11)?;
    let exact = coverage_enumerate(&method, &problem, &grid, &EnumerationConfig::default())?;
    println!("{:>4} {:>9} {:>9} {:>9} {:>8}", "s", "IS", "se", "exact", "ESS");
    for i in 0..grid.len() {
        println!(
            "{:>4} {:>9.4} {:>9.4} {:>9.4} {:>8.0}",
            grid[i], is.estimate[i], is.std_err[i], exact.estimate[i], is.ess[i]
        );
    }
    Ok(())
}

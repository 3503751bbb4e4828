//! Frequentist and Bayesian evaluation of limit-setting methods: coverage
//! by enumeration or importance sampling, credibility under a reference
//! posterior, interval-length quantiles, and the fixed-nuisance simulation
//! study.
//!
//! Every Monte Carlo work item draws from its own RNG stream, so results do
//! not depend on the number of worker threads.

mod coverage;
mod credibility;
mod study;

pub use coverage::{coverage_enumerate, coverage_importance, CoverageProblem, CoverageReport, EnumerationConfig};
pub use credibility::{
    credibility, credibility_by_sampling, credibility_curve, reference_upper_limit, CredibilityConfig,
    CredibilityEstimate, GammaPrior, ReferencePosterior,
};
pub use study::{simulate_study, StudyConfig, StudySummary, StudyTable};

use crate::bayes::{bayes_upper_limits, PriorConfig};
use crate::ds_limits::{CdfRoute, ChannelObservation, Dataset, DsConfig};
use crate::error::{Error, Result};

/// True parameter values `(s, eps, b)` of the generating model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NuisanceTruth {
    pub s: f64,
    pub eps: f64,
    pub b: f64,
}

impl NuisanceTruth {
    pub fn new(s: f64, eps: f64, b: f64) -> Result<Self> {
        if !(s >= 0.0) || !(eps > 0.0) || !(b >= 0.0) || !s.is_finite() || !eps.is_finite() || !b.is_finite() {
            return Err(Error::InvalidConfig(format!("need s >= 0, eps > 0, b >= 0 (got {s}, {eps}, {b})")));
        }
        Ok(Self { s, eps, b })
    }

    /// Poisson means `(mu, nu, rho) = (eps*s + b, t*b, u*eps)`.
    pub fn rates(&self, t: f64, u: f64) -> (f64, f64, f64) {
        (self.eps * self.s + self.b, t * self.b, u * self.eps)
    }
}

/// A procedure mapping a dataset to upper limits at given quantiles.
///
/// Implementations must be pure. An unbounded limit is `f64::INFINITY`.
pub trait LimitMethod: Sync {
    fn name(&self) -> String;
    fn limits(&self, dataset: &Dataset, quantiles: &[f64]) -> Result<Vec<f64>>;
}

/// The DS plausibility-transform limits.
#[derive(Debug, Clone, Copy, Default)]
pub struct DsMethod(pub DsConfig);

impl LimitMethod for DsMethod {
    fn name(&self) -> String {
        "DS".into()
    }

    fn limits(&self, dataset: &Dataset, quantiles: &[f64]) -> Result<Vec<f64>> {
        self.0.upper_limits(dataset, quantiles)
    }
}

/// Single-channel Bayesian limits under a gamma prior preset.
#[derive(Debug, Clone)]
pub struct BayesMethod {
    pub prior: PriorConfig,
    pub route: CdfRoute,
}

impl BayesMethod {
    pub fn new(prior: PriorConfig) -> Self {
        Self { prior, route: CdfRoute::default() }
    }
}

impl LimitMethod for BayesMethod {
    fn name(&self) -> String {
        self.prior.name.clone()
    }

    fn limits(&self, dataset: &Dataset, quantiles: &[f64]) -> Result<Vec<f64>> {
        match dataset.channels.as_slice() {
            [ch] => bayes_upper_limits(ch, &self.prior, quantiles, self.route),
            _ => Err(Error::InvalidConfig("the Bayesian comparator handles single-channel datasets only".into())),
        }
    }
}

/// Wraps a closure as a [`LimitMethod`].
pub struct FnMethod<F> {
    name: String,
    f: F,
}

impl<F> FnMethod<F>
where
    F: Fn(&Dataset, &[f64]) -> Result<Vec<f64>> + Sync,
{
    pub fn new(name: impl Into<String>, f: F) -> Self {
        Self { name: name.into(), f }
    }
}

impl<F> LimitMethod for FnMethod<F>
where
    F: Fn(&Dataset, &[f64]) -> Result<Vec<f64>> + Sync,
{
    fn name(&self) -> String {
        self.name.clone()
    }

    fn limits(&self, dataset: &Dataset, quantiles: &[f64]) -> Result<Vec<f64>> {
        (self.f)(dataset, quantiles)
    }
}

pub(crate) fn single_limit(method: &dyn LimitMethod, ch: ChannelObservation, q: f64) -> Result<f64> {
    Ok(method.limits(&Dataset::single(ch), &[q])?[0])
}

/// Nearest-rank empirical quantiles, taking the lower rank: for sorted
/// values `v` of length `N`, `p` maps to `v[ceil(p N) - 1]`.
pub fn length_quantiles(limits: &[f64], probs: &[f64]) -> Result<Vec<f64>> {
    if limits.is_empty() {
        return Err(Error::domain("length_quantiles", "no limits"));
    }
    let mut sorted = limits.to_vec();
    sorted.sort_by(f64::total_cmp);
    probs
        .iter()
        .map(|&p| {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::domain("length_quantiles", format!("prob {p} outside [0, 1]")));
            }
            let rank = (p * sorted.len() as f64).ceil() as usize;
            Ok(sorted[rank.saturating_sub(1).min(sorted.len() - 1)])
        })
        .collect()
}

/// Poisson probabilities `P(N = k)` for `k = 0..len`.
pub(crate) fn poisson_pmf(rate: f64, len: usize) -> Vec<f64> {
    use crate::specfun::log_gamma;
    if rate == 0.0 {
        let mut v = vec![0.0; len];
        if len > 0 {
            v[0] = 1.0;
        }
        return v;
    }
    let ln_rate = rate.ln();
    (0..len)
        .map(|k| {
            let kf = k as f64;
            (kf * ln_rate - rate - log_gamma(kf + 1.0).expect("positive")).exp()
        })
        .collect()
}

/// Smallest `K` with `P(N <= K) >= 1 - tail_eps`.
pub(crate) fn poisson_cutoff(rate: f64, tail_eps: f64) -> usize {
    use crate::specfun::gamma_p;
    if rate == 0.0 {
        return 0;
    }
    // P(N > K) = P(K + 1, rate), regularized lower incomplete gamma
    let mut k = rate.floor() as usize;
    while gamma_p(k as f64 + 1.0, rate).expect("valid") > tail_eps {
        k += 1;
    }
    k
}

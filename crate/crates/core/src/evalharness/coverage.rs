//! Coverage `C(s) = P(s < R(n, y, z))` of a single-channel method.

use rayon::prelude::*;

use super::{poisson_cutoff, poisson_pmf, single_limit, LimitMethod};
use crate::ds_limits::ChannelObservation;
use crate::error::{Error, Result};
use crate::sampling::{RngHandle, TaskKind};

/// Fixed scales, true nuisance values and the limit quantile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageProblem {
    pub t: f64,
    pub u: f64,
    pub eps: f64,
    pub b: f64,
    pub q: f64,
}

impl CoverageProblem {
    /// `t = 33`, `u = 100`, `eps = 1`, `b = 3`.
    pub fn task1a(q: f64) -> Self {
        Self { t: 33.0, u: 100.0, eps: 1.0, b: 3.0, q }
    }

    /// `t = 3.3`, `u = 10`, `eps = 0.1`, `b = 0.3`.
    pub fn task1b(q: f64) -> Self {
        Self { t: 3.3, u: 10.0, eps: 0.1, b: 0.3, q }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.t > 0.0 && self.u > 0.0 && self.eps > 0.0 && self.b >= 0.0 && self.q > 0.0 && self.q < 1.0;
        if !ok || ![self.t, self.u, self.eps, self.b].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidConfig(format!("bad coverage problem {self:?}")));
        }
        Ok(())
    }

    fn mu(&self, s: f64) -> f64 {
        self.eps * s + self.b
    }

    fn channel(&self, n: u64, y: u64, z: u64) -> ChannelObservation {
        ChannelObservation { n, y, z, t: self.t, u: self.u }
    }
}

fn check_grid(s_grid: &[f64]) -> Result<()> {
    if s_grid.is_empty() || s_grid.iter().any(|s| !(*s >= 0.0) || !s.is_finite()) {
        return Err(Error::InvalidConfig("s grid must be nonempty with finite values >= 0".into()));
    }
    if s_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig("s grid must be strictly increasing".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageReport {
    pub s_grid: Vec<f64>,
    pub estimate: Vec<f64>,
    pub std_err: Vec<f64>,
    /// Effective sample size per grid point (`N` for enumeration).
    pub ess: Vec<f64>,
    /// Mean importance weight per grid point (1 for enumeration).
    pub weight_mean: Vec<f64>,
    pub weight_std_err: Vec<f64>,
    pub method: String,
    pub n_samples: Option<usize>,
    /// Probability mass outside the enumerated box.
    pub truncation_bound: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnumerationConfig {
    /// Per-margin upper-tail cutoff.
    pub tail_eps: f64,
    pub cell_budget: u64,
}

impl Default for EnumerationConfig {
    fn default() -> Self {
        Self { tail_eps: 1e-10, cell_budget: 2_000_000 }
    }
}

/// Exact coverage summed over the `(n, y, z)` box holding all but
/// `tail_eps` of each margin (the `n` margin at the largest grid `s`).
///
/// Each cell's limit is computed once and reused for every `s`.
pub fn coverage_enumerate(
    method: &dyn LimitMethod,
    problem: &CoverageProblem,
    s_grid: &[f64],
    cfg: &EnumerationConfig,
) -> Result<CoverageReport> {
    problem.validate()?;
    check_grid(s_grid)?;
    if !(cfg.tail_eps > 0.0 && cfg.tail_eps < 1.0) {
        return Err(Error::InvalidConfig(format!("tail_eps = {} must be in (0, 1)", cfg.tail_eps)));
    }
    let s_max = *s_grid.last().expect("nonempty");
    let nu = problem.t * problem.b;
    let rho = problem.u * problem.eps;
    let (kn, ky, kz) = (
        poisson_cutoff(problem.mu(s_max), cfg.tail_eps) + 1,
        poisson_cutoff(nu, cfg.tail_eps) + 1,
        poisson_cutoff(rho, cfg.tail_eps) + 1,
    );
    let cells = (kn * ky * kz) as u64;
    if cells > cfg.cell_budget {
        return Err(Error::EnumerationTooLarge { cells, budget: cfg.cell_budget });
    }
    log::info!("enumerating {cells} cells ({kn} x {ky} x {kz})");
    let limits: Vec<f64> = (0..kn * ky * kz)
        .into_par_iter()
        .map(|i| {
            let (n, rest) = (i / (ky * kz), i % (ky * kz));
            let (y, z) = (rest / kz, rest % kz);
            single_limit(method, problem.channel(n as u64, y as u64, z as u64), problem.q)
        })
        .collect::<Result<_>>()?;
    let py = poisson_pmf(nu, ky);
    let pz = poisson_pmf(rho, kz);
    let pyz: Vec<f64> = (0..ky * kz).map(|j| py[j / kz] * pz[j % kz]).collect();
    let estimate = s_grid
        .iter()
        .map(|&s| {
            let pn = poisson_pmf(problem.mu(s), kn);
            let mut total = 0.0;
            for (n, &p) in pn.iter().enumerate() {
                let row = &limits[n * ky * kz..(n + 1) * ky * kz];
                let covered: f64 = row.iter().zip(&pyz).filter(|(r, _)| s < **r).map(|(_, w)| w).sum();
                total += p * covered;
            }
            total.min(1.0)
        })
        .collect();
    let m = s_grid.len();
    Ok(CoverageReport {
        s_grid: s_grid.to_vec(),
        estimate,
        std_err: vec![0.0; m],
        ess: vec![cells as f64; m],
        weight_mean: vec![1.0; m],
        weight_std_err: vec![0.0; m],
        method: method.name(),
        n_samples: None,
        truncation_bound: Some(3.0 * cfg.tail_eps),
    })
}

/// Coverage from one Monte Carlo sample drawn at `s_ref` and reweighted to
/// each grid point through the `n` margin:
/// `w_s(n) = exp(-(mu_s - mu_ref)) (mu_s / mu_ref)^n`.
pub fn coverage_importance(
    method: &dyn LimitMethod,
    problem: &CoverageProblem,
    s_grid: &[f64],
    n_samples: usize,
    s_ref: f64,
    seed: u64,
) -> Result<CoverageReport> {
    problem.validate()?;
    check_grid(s_grid)?;
    if n_samples == 0 {
        return Err(Error::InvalidConfig("need at least one sample".into()));
    }
    if !(s_ref >= s_grid[0] && s_ref <= *s_grid.last().expect("nonempty")) {
        return Err(Error::InvalidConfig(format!("s_ref = {s_ref} outside the s grid")));
    }
    let mu_ref = problem.mu(s_ref);
    if !(mu_ref > 0.0) {
        return Err(Error::InvalidConfig("reference mean eps*s_ref + b must be positive".into()));
    }
    let (nu, rho) = (problem.t * problem.b, problem.u * problem.eps);
    let draws: Vec<(u64, f64)> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = RngHandle::for_task(seed, TaskKind::Coverage, i as u64, 0);
            let y = rng.poisson(nu);
            let z = rng.poisson(rho);
            let n = rng.poisson(mu_ref);
            Ok((n, single_limit(method, problem.channel(n, y, z), problem.q)?))
        })
        .collect::<Result<_>>()?;
    let nf = n_samples as f64;
    let m = s_grid.len();
    let mut report = CoverageReport {
        s_grid: s_grid.to_vec(),
        estimate: Vec::with_capacity(m),
        std_err: Vec::with_capacity(m),
        ess: Vec::with_capacity(m),
        weight_mean: Vec::with_capacity(m),
        weight_std_err: Vec::with_capacity(m),
        method: method.name(),
        n_samples: Some(n_samples),
        truncation_bound: None,
    };
    for &s in s_grid {
        let mu = problem.mu(s);
        let weight = |n: u64| -> f64 {
            if mu == 0.0 {
                return if n == 0 { mu_ref.exp() } else { 0.0 };
            }
            (mu_ref - mu + n as f64 * (mu / mu_ref).ln()).exp()
        };
        let (mut sw, mut sw2, mut sc, mut sc2) = (0.0, 0.0, 0.0, 0.0);
        for &(n, r) in &draws {
            let w = weight(n);
            let c = if s < r { w } else { 0.0 };
            sw += w;
            sw2 += w * w;
            sc += c;
            sc2 += c * c;
        }
        let mean_c = sc / nf;
        let mean_w = sw / nf;
        let var = |s2: f64, mean: f64| {
            if n_samples > 1 {
                ((s2 - nf * mean * mean) / (nf - 1.0)).max(0.0)
            } else {
                0.0
            }
        };
        report.estimate.push(mean_c);
        report.std_err.push((var(sc2, mean_c) / nf).sqrt());
        report.weight_mean.push(mean_w);
        report.weight_std_err.push((var(sw2, mean_w) / nf).sqrt());
        let ess = if sw2 > 0.0 { sw * sw / sw2 } else { 0.0 };
        if ess < 0.05 * nf {
            log::warn!("importance weights degenerate at s = {s}: effective sample size {ess:.1} of {n_samples}");
        }
        report.ess.push(ess);
    }
    Ok(report)
}

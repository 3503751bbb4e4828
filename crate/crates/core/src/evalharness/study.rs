//! Coverage of several methods on shared simulated datasets at fixed
//! nuisance values, summarized over a range of `s`.

use rayon::prelude::*;

use super::LimitMethod;
use crate::ds_limits::{ChannelObservation, Dataset};
use crate::error::{Error, Result};
use crate::sampling::{RngHandle, TaskKind};

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub t: f64,
    pub u: f64,
    pub eps: f64,
    pub b: f64,
    pub s_grid: Vec<f64>,
    pub reps: usize,
    pub levels: Vec<f64>,
    /// Inclusive `s` range the summary averages over.
    pub summary_range: (f64, f64),
    pub seed: u64,
}

impl StudyConfig {
    /// `t = 33`, `u = 100`, `eps = 1`, `b = 3`, `s` from 0 to 40 in steps of
    /// 0.25, 10,000 datasets per `s`.
    pub fn full_scale() -> Self {
        Self {
            t: 33.0,
            u: 100.0,
            eps: 1.0,
            b: 3.0,
            s_grid: (0..=160).map(|i| i as f64 * 0.25).collect(),
            reps: 10_000,
            levels: vec![0.90, 0.99],
            summary_range: (20.0, 40.0),
            seed: crate::sampling::DEFAULT_SEED,
        }
    }

    /// Integer `s` from 20 to 40 with 2,000 datasets each.
    pub fn desk_scale() -> Self {
        Self { s_grid: (20..=40).map(f64::from).collect(), reps: 2_000, ..Self::full_scale() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 || self.s_grid.is_empty() || self.levels.is_empty() {
            return Err(Error::InvalidConfig("study needs reps >= 1, an s grid and levels".into()));
        }
        if !(self.t > 0.0 && self.u > 0.0 && self.eps > 0.0 && self.b >= 0.0) {
            return Err(Error::InvalidConfig("study scales and nuisance values out of range".into()));
        }
        if self.s_grid.iter().any(|s| !(*s >= 0.0)) || self.levels.iter().any(|q| !(*q > 0.0 && *q < 1.0)) {
            return Err(Error::InvalidConfig("s values must be >= 0 and levels in (0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudySummary {
    pub method: String,
    pub level: f64,
    pub mean: f64,
    pub stdev: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyTable {
    pub methods: Vec<String>,
    pub levels: Vec<f64>,
    pub s_grid: Vec<f64>,
    /// `coverage[method][level][s]`.
    pub coverage: Vec<Vec<Vec<f64>>>,
    /// `limits[method][level][s * reps + rep]`.
    pub limits: Vec<Vec<Vec<f64>>>,
    pub summary: Vec<StudySummary>,
}

impl StudyTable {
    pub fn summary_for(&self, method: &str, level: f64) -> Option<&StudySummary> {
        self.summary.iter().find(|r| r.method == method && r.level == level)
    }
}

/// Draws `reps` datasets per `s` (one RNG stream per dataset), computes
/// every method's limits on each, and reports per-`s` coverage plus its
/// mean and sample standard deviation over the summary range.
pub fn simulate_study(cfg: &StudyConfig, methods: &[&dyn LimitMethod]) -> Result<StudyTable> {
    cfg.validate()?;
    let reps = cfg.reps;
    let total = cfg.s_grid.len() * reps;
    let rows: Vec<Vec<Vec<f64>>> = (0..total)
        .into_par_iter()
        .map(|item| {
            let s = cfg.s_grid[item / reps];
            let mut rng = RngHandle::for_task(cfg.seed, TaskKind::Simulation, item as u64, 0);
            let n = rng.poisson(cfg.eps * s + cfg.b);
            let y = rng.poisson(cfg.t * cfg.b);
            let z = rng.poisson(cfg.u * cfg.eps);
            let ds = Dataset::single(ChannelObservation { n, y, z, t: cfg.t, u: cfg.u });
            methods.iter().map(|m| m.limits(&ds, &cfg.levels)).collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let mut limits = vec![vec![Vec::with_capacity(total); cfg.levels.len()]; methods.len()];
    for row in &rows {
        for (mi, per_level) in row.iter().enumerate() {
            for (li, &l) in per_level.iter().enumerate() {
                limits[mi][li].push(l);
            }
        }
    }
    let coverage: Vec<Vec<Vec<f64>>> = limits
        .iter()
        .map(|per_level| {
            per_level
                .iter()
                .map(|ls| {
                    cfg.s_grid
                        .iter()
                        .enumerate()
                        .map(|(si, &s)| ls[si * reps..(si + 1) * reps].iter().filter(|&&r| s < r).count() as f64 / reps as f64)
                        .collect()
                })
                .collect()
        })
        .collect();

    let (lo, hi) = cfg.summary_range;
    let in_range: Vec<usize> = (0..cfg.s_grid.len()).filter(|&i| cfg.s_grid[i] >= lo && cfg.s_grid[i] <= hi).collect();
    let names: Vec<String> = methods.iter().map(|m| m.name()).collect();
    let mut summary = Vec::new();
    for (mi, name) in names.iter().enumerate() {
        for (li, &level) in cfg.levels.iter().enumerate() {
            let vals: Vec<f64> = in_range.iter().map(|&i| coverage[mi][li][i]).collect();
            let (mean, stdev) = mean_sd(&vals);
            summary.push(StudySummary { method: name.clone(), level, mean, stdev });
        }
    }
    Ok(StudyTable { methods: names, levels: cfg.levels.clone(), s_grid: cfg.s_grid.clone(), coverage, limits, summary })
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let sd = if v.len() > 1 { (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() } else { 0.0 };
    (mean, sd)
}
